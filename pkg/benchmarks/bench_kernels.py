"""Benchmark the two kernel backends against each other.

Runs the beam raycaster and the thermal ground-temperature classifier over
realistic corridor inputs, first checking that the compiled extension and
the NumPy reference produce bit-identical arrays, then timing both.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats N] [--json]
"""

import argparse
import json
import math
import sys
import time

import numpy as np

from tiba_sim import _refkern
from tiba_sim.sensors import LidarConfig, ThermalConfig, thermal_geometry
from tiba_sim.world import HeightClass, ScenarioSpec, generate_tunnel

try:
    from tiba_sim import _core
except ImportError:
    _core = None


def _lidar_cases(n_poses: int):
    spec = ScenarioSpec(seed=3, height_class=HeightClass.H2)
    scenario = generate_tunnel(spec)
    cfg = LidarConfig()
    step = (cfg.angle_max_rad - cfg.angle_min_rad) / cfg.beam_count
    rel = cfg.angle_min_rad + step * np.arange(cfg.beam_count)
    circles = scenario.all_stems()
    cases = []
    for i in range(n_poses):
        x = 2.0 + i * (spec.length_m - 4.0) / n_poses
        theta = 0.05 * math.sin(i)
        ang = theta + rel
        cases.append(
            (np.cos(ang), np.sin(ang), x, 0.1 * math.cos(i), circles, cfg.max_range_m)
        )
    return cases


def _thermal_cases(n_poses: int):
    cfg = ThermalConfig()
    geom = thermal_geometry(cfg)
    y_wall = 0.75
    kerb_inner = y_wall - cfg.kerb_width_m
    cases = []
    for i in range(n_poses):
        theta = 0.05 * math.sin(i)
        lat_row = 0.1 * math.cos(i) + math.sin(theta) * geom.xb_row
        cases.append(
            (
                lat_row,
                math.cos(theta),
                geom.yb,
                geom.row_valid,
                y_wall,
                kerb_inner,
                cfg.path_temp_c,
                cfg.kerb_temp_c,
                cfg.plant_temp_c,
                True,
            )
        )
    return cases


def _check_parity(fn_name: str, cases) -> None:
    for case in cases:
        a = getattr(_refkern, fn_name)(*case)
        b = getattr(_core, fn_name)(*case)
        if not np.array_equal(a, b):
            raise SystemExit(f"backend mismatch in {fn_name}; refusing to time")


def _time(fn, cases, repeats: int) -> float:
    """Seconds per call, best of three batches."""
    best = math.inf
    for _ in range(3):
        t0 = time.perf_counter()
        for i in range(repeats):
            fn(*cases[i % len(cases)])
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=500)
    parser.add_argument("--poses", type=int, default=32)
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args(argv)

    if _core is None:
        print("compiled extension not importable; nothing to compare", file=sys.stderr)
        return 1

    suites = {
        "raycast_circles": _lidar_cases(args.poses),
        "thermal_field": _thermal_cases(args.poses),
    }
    rows = {}
    for name, cases in suites.items():
        _check_parity(name, cases)
        t_ref = _time(getattr(_refkern, name), cases, args.repeats)
        t_core = _time(getattr(_core, name), cases, args.repeats)
        rows[name] = {
            "python_us": t_ref * 1e6,
            "compiled_us": t_core * 1e6,
            "speedup": t_ref / t_core,
        }

    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    print(f"{'kernel':<18} {'python':>10} {'compiled':>10} {'speedup':>9}")
    for name, r in rows.items():
        print(
            f"{name:<18} {r['python_us']:>8.1f}us {r['compiled_us']:>8.1f}us"
            f" {r['speedup']:>8.2f}x"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
