"""Deterministic seed derivation for independent random substreams.

Every stochastic draw in the simulator comes from a substream derived from
(run seed, stream id, frame index).  Substreams are mutually independent, so
skipping a consumer (e.g. not rendering a sensor during replay) never shifts
the draws seen by any other consumer.  The mixer is splitmix64, which is
integer-exact and therefore stable across platforms and NumPy versions.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Stream ids, one per independent noise consumer.
STREAM_LIDAR = 1
STREAM_THERMAL = 2
STREAM_SOLAR = 3
STREAM_HT = 4


def splitmix64(x: int) -> int:
    """One splitmix64 scramble step; returns a value in [0, 2**64)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def derive_seed(*parts: int) -> int:
    """Fold integer parts (any sign) into a single 64-bit stream seed."""
    h = 0x6A09E667F3BCC909
    for p in parts:
        h = splitmix64(h ^ (p & _MASK64))
    return h


def unit_float(*parts: int) -> float:
    """Deterministic uniform in [0, 1) keyed by the integer parts."""
    return derive_seed(*parts) / 2.0**64


def substream(*parts: int) -> np.random.Generator:
    """Fresh generator for the substream keyed by the integer parts."""
    return np.random.default_rng(derive_seed(*parts))
