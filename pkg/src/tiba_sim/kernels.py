"""Kernel backend selection: compiled extension if present, NumPy otherwise.

Set TIBA_SIM_PURE=1 to force the NumPy reference implementation even when
the extension is importable (used by the parity tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _refkern

if os.environ.get("TIBA_SIM_PURE") == "1":
    _impl = _refkern
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _refkern
        BACKEND = "python"

raycast_circles = _impl.raycast_circles
thermal_field = _impl.thermal_field


def backend() -> str:
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return BACKEND
