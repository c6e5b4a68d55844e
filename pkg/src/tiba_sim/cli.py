"""Command-line entry: sizing report, scenario runs, replay and metrics tools.

Exit codes: 0 on success (for `run`: completed without collision), 1 when a
run falls short or a log is unusable, 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys

from .drivetrain import KGF_CM_TO_NM, SizingInputs, size_drivetrain
from .pipeline import CorruptLog, RunLogWriter, read_run_log_file
from .runner import (
    RunMetrics,
    RunResult,
    build_run_config,
    metrics_from_log,
    replay_log,
)
from .service import serve_log, serve_run
from .world import ConfigError, parse_scenario_file


def _add_size_parser(sub) -> None:
    p = sub.add_parser("size", help="print the drivetrain sizing chain")
    p.add_argument("--mass", type=float, default=130.0, help="robot mass, kg")
    p.add_argument("--mu", type=float, default=0.6, help="traction coefficient")
    p.add_argument("--wheel-radius", type=float, default=0.2, help="m")
    p.add_argument("--gear-ratio", type=float, default=50.0)
    p.add_argument(
        "--motor-torque", type=float, default=1.57, help="rated motor torque, N*m"
    )
    p.add_argument(
        "--motor-torque-kgf-cm",
        type=float,
        default=None,
        help="rated motor torque in kgf*cm (overrides --motor-torque)",
    )
    p.add_argument("--motor-rpm", type=float, default=3000.0)
    p.add_argument("--json", action="store_true", help="emit JSON instead of a table")


def _add_run_parser(sub) -> None:
    p = sub.add_parser("run", help="simulate a scenario")
    p.add_argument("--scenario", required=True, help="scenario config file")
    p.add_argument(
        "--nav",
        choices=("thermal", "lidar", "waypoint", "teleop"),
        default=None,
        help="navigation mode (overrides the scenario file)",
    )
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--duration", type=float, default=None, help="seconds")
    p.add_argument("--log", default=None, help="write the run log here (JSONL)")
    p.add_argument("--no-log", action="store_true", help="skip writing a log")
    p.add_argument("--serve", action="store_true", help="expose the WebSocket service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--rate", type=float, default=1.0, help="wall-clock pacing factor")


def _add_replay_parser(sub) -> None:
    p = sub.add_parser("replay", help="re-drive the dynamics from a log")
    p.add_argument("--log", required=True)
    p.add_argument("--save", default=None, help="write the replayed log here")


def _add_metrics_parser(sub) -> None:
    p = sub.add_parser("metrics", help="recompute run metrics from a log")
    p.add_argument("--log", required=True)
    p.add_argument("--json", action="store_true")


def _add_serve_replay_parser(sub) -> None:
    p = sub.add_parser("serve-replay", help="stream a recorded log over WebSocket")
    p.add_argument("--log", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--rate", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tiba-sim", description="tankette field simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_size_parser(sub)
    _add_run_parser(sub)
    _add_replay_parser(sub)
    _add_metrics_parser(sub)
    _add_serve_replay_parser(sub)
    return parser


def _print_metrics(metrics: RunMetrics, as_json: bool = False) -> None:
    if as_json:
        print(json.dumps(metrics.as_dict(), indent=2, sort_keys=True))
        return
    for key, value in metrics.as_dict().items():
        if isinstance(value, float):
            print(f"{key} = {value:.6f}")
        else:
            print(f"{key} = {value}")


def _cmd_size(args) -> int:
    torque = args.motor_torque
    if args.motor_torque_kgf_cm is not None:
        torque = args.motor_torque_kgf_cm * KGF_CM_TO_NM
    inputs = SizingInputs(
        mass_kg=args.mass,
        wheel_radius_m=args.wheel_radius,
        gear_ratio=args.gear_ratio,
        motor_rated_torque_nm=torque,
        motor_free_speed_rpm=args.motor_rpm,
        static_friction=args.mu,
    )
    report = size_drivetrain(inputs)
    if args.json:
        print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
        return 0
    rows = [
        ("wheel normal load", f"{report.wheel_normal_force_n:.2f} N"),
        ("wheel traction force", f"{report.traction_force_per_wheel_n:.2f} N"),
        ("wheel torque demand", f"{report.wheel_torque_nm:.3f} N*m"),
        ("gearbox torque demand", f"{report.required_gearbox_torque_nm:.3f} N*m"),
        ("gearbox torque available", f"{report.available_gearbox_torque_nm:.3f} N*m"),
        ("torque margin", f"{report.torque_margin_nm:.3f} N*m"),
        ("wheel speed limit", f"{report.wheel_speed_limit_rad_s:.4f} rad/s"),
        ("top speed", f"{report.top_speed_m_s:.4f} m/s"),
        ("top speed", f"{report.top_speed_km_h:.2f} km/h"),
        ("feasible", "yes" if report.feasible else "NO"),
    ]
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {value}")
    return 0


def _cmd_run(args) -> int:
    keys = parse_scenario_file(args.scenario)
    cfg = build_run_config(
        keys, mode=args.nav, seed=args.seed, duration_s=args.duration
    )
    log_path = None if args.no_log else args.log
    result: RunResult
    with contextlib.ExitStack() as stack:
        log = None
        if log_path:
            stream = stack.enter_context(open(log_path, "w", encoding="utf-8"))
            log = RunLogWriter(stream, cfg.scenario.seed, cfg.to_dict())
        if args.serve:
            result = serve_run(
                cfg, log=log, host=args.host, port=args.port, rate=args.rate
            )
        else:
            from .runner import Simulation

            result = Simulation(cfg, log=log).run()
    _print_metrics(result.metrics)
    print(
        f"final pose: x={result.final_pose.x:.3f} y={result.final_pose.y:.3f} "
        f"theta={result.final_pose.theta:.4f} (t={result.sim_time_s:.2f} s)"
    )
    ok = result.metrics.completion and result.metrics.stem_collisions == 0
    return 0 if ok else 1


def _cmd_replay(args) -> int:
    header, records = read_run_log_file(args.log)
    with contextlib.ExitStack() as stack:
        log = None
        if args.save:
            stream = stack.enter_context(open(args.save, "w", encoding="utf-8"))
            log = RunLogWriter(stream, header["seed"], header["config"])
        result = replay_log(header, records, log=log)
    _print_metrics(result.metrics)
    print(
        f"final pose: x={result.final_pose.x:.3f} y={result.final_pose.y:.3f} "
        f"theta={result.final_pose.theta:.4f} (t={result.sim_time_s:.2f} s)"
    )
    ok = result.metrics.completion and result.metrics.stem_collisions == 0
    return 0 if ok else 1


def _cmd_metrics(args) -> int:
    header, records = read_run_log_file(args.log)
    metrics = metrics_from_log(header, records)
    _print_metrics(metrics, as_json=args.json)
    return 0


def _cmd_serve_replay(args) -> int:
    _, records = read_run_log_file(args.log)
    if not records:
        raise ConfigError("log holds no records")
    sent = serve_log(records, host=args.host, port=args.port, rate=args.rate)
    print(f"streamed {sent} frames")
    return 0


_COMMANDS = {
    "size": _cmd_size,
    "run": _cmd_run,
    "replay": _cmd_replay,
    "metrics": _cmd_metrics,
    "serve-replay": _cmd_serve_replay,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CorruptLog as exc:
        print(f"corrupt log: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
