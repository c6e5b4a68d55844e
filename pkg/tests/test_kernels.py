"""Backend parity: the compiled kernels must match the NumPy reference bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiba_sim import _refkern, kernels

_core = pytest.importorskip(
    "tiba_sim._core", reason="compiled extension not built in this environment"
)


def _random_ray_case(seed: int, n_beams=180, n_circles=40):
    rng = np.random.default_rng(seed)
    ang = rng.uniform(-np.pi, np.pi, n_beams)
    dir_x = np.cos(ang)
    dir_y = np.sin(ang)
    circles = np.column_stack(
        (
            rng.uniform(-6, 6, n_circles),
            rng.uniform(-6, 6, n_circles),
            rng.uniform(0.005, 0.4, n_circles),
        )
    )
    px, py = rng.uniform(-1, 1, 2)
    return dir_x, dir_y, float(px), float(py), circles


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_raycast_parity_random(seed):
    dir_x, dir_y, px, py, circles = _random_ray_case(seed)
    ref = _refkern.raycast_circles(dir_x, dir_y, px, py, circles, 8.0)
    fast = _core.raycast_circles(dir_x, dir_y, px, py, circles, 8.0)
    assert np.array_equal(ref, fast)  # not approx: identical bits


def test_raycast_parity_structured_cases():
    dir_x = np.array([1.0, 0.0, -1.0, 1.0])
    dir_y = np.array([0.0, 1.0, 0.0, 0.0])
    cases = [
        np.empty((0, 3)),  # no circles at all
        np.array([[2.0, 0.0, 0.5]]),  # dead ahead of beam 0
        np.array([[-3.0, 0.0, 0.5]]),  # behind beam 0, ahead of beam 2
        np.array([[2.0, 0.5, 0.5]]),  # tangent to beam 0
        np.array([[0.0, 0.0, 0.5]]),  # origin inside the circle
        np.array([[9.5, 0.0, 0.4]]),  # beyond max range
    ]
    for circles in cases:
        ref = _refkern.raycast_circles(dir_x, dir_y, 0.0, 0.0, circles, 8.0)
        fast = _core.raycast_circles(dir_x, dir_y, 0.0, 0.0, circles, 8.0)
        assert np.array_equal(ref, fast), circles


def test_raycast_semantics():
    dir_x = np.array([1.0])
    dir_y = np.array([0.0])
    hit = kernels.raycast_circles(
        dir_x, dir_y, 0.0, 0.0, np.array([[3.0, 0.0, 0.25]]), 8.0
    )
    assert hit[0] == 2.75  # d - r, exactly representable here
    tangent = kernels.raycast_circles(
        dir_x, dir_y, 0.0, 0.0, np.array([[3.0, 0.25, 0.25]]), 8.0
    )
    assert tangent[0] == 3.0  # grazing contact at closest approach
    behind = kernels.raycast_circles(
        dir_x, dir_y, 0.0, 0.0, np.array([[-3.0, 0.0, 0.25]]), 8.0
    )
    assert behind[0] == 8.0
    # a ray starting inside a trunk reports a miss, by design
    inside = kernels.raycast_circles(
        dir_x, dir_y, 0.0, 0.0, np.array([[0.05, 0.0, 0.25]]), 8.0
    )
    assert inside[0] == 8.0
    nearest = kernels.raycast_circles(
        dir_x,
        dir_y,
        0.0,
        0.0,
        np.array([[5.0, 0.0, 0.5], [2.0, 0.0, 0.5], [3.0, 0.0, 0.5]]),
        8.0,
    )
    assert nearest[0] == 1.5  # closest circle wins


def test_raycast_accepts_readonly_arrays():
    dir_x, dir_y, px, py, circles = _random_ray_case(7)
    for arr in (dir_x, dir_y, circles):
        arr.setflags(write=False)
    ref = _refkern.raycast_circles(dir_x, dir_y, px, py, circles, 8.0)
    fast = _core.raycast_circles(dir_x, dir_y, px, py, circles, 8.0)
    assert np.array_equal(ref, fast)


def _random_field_case(seed: int, h=40, w=60):
    rng = np.random.default_rng(seed)
    lat_row = rng.uniform(-2, 2, h)
    yb = rng.uniform(-3, 3, (h, w))
    row_valid = rng.uniform(0, 1, h) > 0.2
    cos_theta = float(rng.uniform(-1, 1))
    return lat_row, cos_theta, yb, row_valid


@given(seed=st.integers(0, 2**32 - 1), has_kerb=st.booleans())
@settings(max_examples=30, deadline=None)
def test_thermal_field_parity_random(seed, has_kerb):
    lat_row, cos_theta, yb, row_valid = _random_field_case(seed)
    args = (lat_row, cos_theta, yb, row_valid, 0.75, 0.6, 45.0, 25.0, 30.0, has_kerb)
    assert np.array_equal(_refkern.thermal_field(*args), _core.thermal_field(*args))


def test_thermal_field_semantics():
    lat_row = np.array([0.0, 0.0])
    yb = np.array([[0.0, 0.65, 0.9], [0.0, 0.65, 0.9]])
    row_valid = np.array([True, False])
    out = kernels.thermal_field(
        lat_row, 1.0, yb, row_valid, 0.75, 0.6, 45.0, 25.0, 30.0, True
    )
    assert out[0].tolist() == [45.0, 25.0, 30.0]  # path, kerb, plant
    assert out[1].tolist() == [30.0, 30.0, 30.0]  # above horizon: all canopy
    no_kerb = kernels.thermal_field(
        lat_row, 1.0, yb, row_valid, 0.75, 0.6, 26.0, 25.0, 30.0, False
    )
    assert no_kerb[0].tolist() == [26.0, 26.0, 30.0]


def _backend_in_subprocess(extra_env: dict) -> str:
    env = dict(os.environ, **extra_env)
    out = subprocess.run(
        [sys.executable, "-c", "import tiba_sim.kernels as k; print(k.backend())"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return out.stdout.strip()


def test_backend_selection():
    assert kernels.backend() in ("compiled", "python")
    assert _backend_in_subprocess({"TIBA_SIM_PURE": "1"}) == "python"
    clean = {k: v for k, v in os.environ.items() if k != "TIBA_SIM_PURE"}
    out = subprocess.run(
        [sys.executable, "-c", "import tiba_sim.kernels as k; print(k.backend())"],
        env=clean,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "compiled"
