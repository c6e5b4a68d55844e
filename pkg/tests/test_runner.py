"""Whole-run behavior: stepping, commands, events, logs, replay."""

import io
import json

import pytest

from tiba_sim.pipeline import TeleopConfig, VssConfig
from tiba_sim.runner import (
    NavSettings,
    RunConfig,
    Simulation,
    build_run_config,
    metrics_from_log,
    replay_log,
)
from tiba_sim.pipeline import RunLogWriter, read_run_log
from tiba_sim.world import ConfigError, HeightClass, ScenarioSpec

SHORT = ScenarioSpec(length_m=8.0, seed=11)


def _waypoint_cfg(**kw) -> RunConfig:
    return RunConfig(
        scenario=kw.pop("scenario", SHORT),
        nav=NavSettings(mode="waypoint"),
        duration_s=kw.pop("duration_s", 30.0),
        **kw,
    )


def _event_names(sim: Simulation) -> list[str]:
    return [name for _, name in sim.events]


# --- config assembly -------------------------------------------------------------


def test_build_run_config_precedence():
    keys = {
        "seed": 3,
        "nav.mode": "thermal",
        "nav.k_y": 1.8,
        "duration_s": 45.0,
    }
    cfg = build_run_config(keys, mode="lidar", seed=5, duration_s=None)
    assert cfg.scenario.seed == 5  # CLI seed beats the file
    assert cfg.nav.mode == "lidar"  # CLI mode beats the file
    assert cfg.nav.k_y == 1.8  # file key survives
    assert cfg.duration_s == 45.0  # None override falls back to the file


def test_build_run_config_rejects_unknown_override():
    with pytest.raises(ConfigError):
        build_run_config({}, turbo_mode=True)
    with pytest.raises(ConfigError):
        NavSettings(mode="astral")


def test_run_config_dict_round_trip():
    cfg = RunConfig(
        scenario=ScenarioSpec(seed=4, height_class=HeightClass.H2),
        nav=NavSettings(mode="lidar", k_y=1.7),
        waypoints=((1.0, 0.0), (2.0, 0.5)),
        duration_s=12.5,
    )
    wire = json.loads(json.dumps(cfg.to_dict()))
    assert RunConfig.from_dict(wire) == cfg
    bare = RunConfig()
    assert RunConfig.from_dict(json.loads(json.dumps(bare.to_dict()))) == bare


# --- end-to-end runs -------------------------------------------------------------


def test_waypoint_run_completes_tunnel():
    sim = Simulation(_waypoint_cfg())
    result = sim.run()
    assert result.metrics.completion
    assert result.metrics.stem_collisions == 0
    assert result.final_pose.x >= 7.5
    assert result.metrics.cross_track_max_m < 0.1
    assert "completed" in _event_names(sim)
    assert result.sim_time_s < 30.0  # finished well before the clock


def test_identical_configs_run_identically():
    a = Simulation(_waypoint_cfg()).run()
    b = Simulation(_waypoint_cfg()).run()
    assert a.final_pose == b.final_pose
    assert a.metrics == b.metrics
    assert a.steps == b.steps


def test_sun_aided_initial_heading():
    cfg = _waypoint_cfg(start_theta_rad=0.3)
    sim = Simulation(cfg)
    assert sim.odometry.pose.theta == pytest.approx(0.3, abs=1e-9)
    blind = Simulation(
        RunConfig(
            scenario=SHORT,
            nav=NavSettings(mode="waypoint"),
            start_theta_rad=0.3,
            use_sun_heading_init=False,
        )
    )
    assert blind.odometry.pose.theta == 0.3


def test_waypoint_arrival_stops_run():
    cfg = _waypoint_cfg(waypoints=((1.5, 0.0),))
    sim = Simulation(cfg)
    result = sim.run()
    assert "arrived" in _event_names(sim)
    assert not result.metrics.completion  # stopped long before the far end
    assert result.sim_time_s < 10.0
    assert abs(result.final_pose.x - 1.5) < 0.5


def test_out_of_bounds_aborts():
    cfg = _waypoint_cfg(start_x_m=-6.0)
    sim = Simulation(cfg)
    result = sim.run()
    assert "out_of_bounds" in _event_names(sim)
    assert result.steps == 1


def test_power_exhausted_stops_run():
    cfg = _waypoint_cfg(vss=VssConfig(battery_capacity_ah=0.0002))
    sim = Simulation(cfg)
    result = sim.run()
    assert "power_exhausted" in _event_names(sim)
    assert not result.metrics.completion
    assert result.sim_time_s < 5.0
    assert result.metrics.energy_used_wh == pytest.approx(0.0002 * 48.0, rel=1e-6)


def test_tight_scenario_event():
    tight = ScenarioSpec(length_m=8.0, row_spacing_m=1.0, height_class=HeightClass.H1)
    sim = Simulation(RunConfig(scenario=tight, nav=NavSettings(mode="waypoint")))
    assert "tight_scenario" in _event_names(sim)
    roomy = Simulation(_waypoint_cfg())
    assert "tight_scenario" not in _event_names(roomy)


def test_nav_loss_holds_then_stops():
    # a field with no stems at all: lidar sees nothing from the first tick
    bare = ScenarioSpec(length_m=1.0, row_overrun_m=0.0, stem_pitch_m=5.0)
    cfg = RunConfig(scenario=bare, nav=NavSettings(mode="lidar"), duration_s=3.0)
    sim = Simulation(cfg)
    result = sim.run()
    names = _event_names(sim)
    assert names.count("nav_lost") == 1
    assert "nav_recovered" not in names
    # never had a command to hold: the robot stays parked
    assert result.final_pose.x == 0.0
    assert result.metrics.distance_traveled_m == 0.0


# --- external commands -----------------------------------------------------------


def _step_control_frame(sim: Simulation) -> None:
    for _ in range(sim._control_every):
        sim.step()


def test_teleop_drive_and_deadman_halt():
    cfg = RunConfig(
        scenario=SHORT,
        nav=NavSettings(mode="teleop"),
        teleop=TeleopConfig(v_step_m_s=0.2),
        duration_s=60.0,
    )
    sim = Simulation(cfg)
    for i in range(10):  # ramp to 1.0 m/s, then hold it while speed settles
        axis = 1.0 if i < 5 else 0.0
        sim.submit({"type": "teleop", "axis_forward": axis, "deadman": True})
        _step_control_frame(sim)
    assert sim.setpoint.v == pytest.approx(1.0, abs=1e-9)
    assert sim.left.speed_rad_s > 3.0
    x_before = sim.pose.x
    assert x_before > 0.3

    sim.submit({"type": "teleop", "deadman": False})
    _step_control_frame(sim)
    _step_control_frame(sim)
    # full halt within two control frames of the release
    assert sim.left.speed_rad_s == 0.0
    assert sim.right.speed_rad_s == 0.0
    assert sim.setpoint.v == 0.0


def test_heartbeat_timeout_zeroes_setpoint():
    cfg = RunConfig(
        scenario=SHORT,
        nav=NavSettings(mode="teleop"),
        teleop=TeleopConfig(v_step_m_s=0.2),
        duration_s=60.0,
    )
    sim = Simulation(cfg)
    for _ in range(5):
        sim.submit({"type": "teleop", "axis_forward": 1.0, "deadman": True})
        _step_control_frame(sim)
    assert sim.setpoint.v > 0.0
    # operator goes silent: watchdog trips after heartbeat_timeout_s
    for _ in range(8):
        _step_control_frame(sim)
    assert _event_names(sim).count("heartbeat_lost") == 1
    assert sim.setpoint.v == 0.0
    assert sim.left.speed_rad_s == 0.0


def test_relay_command_gates_sensor_and_logs_event():
    bare = ScenarioSpec(length_m=8.0, seed=11)
    cfg = RunConfig(scenario=bare, nav=NavSettings(mode="lidar"), duration_s=2.0)
    sim = Simulation(cfg)
    sim.submit({"type": "relay", "name": "lidar", "on": False})
    sim.run()
    names = _event_names(sim)
    assert "relay_command" in names
    assert "nav_lost" in names  # estimator starved once the relay dropped
    # junk relay names are ignored without side effects
    sim2 = Simulation(cfg)
    sim2.submit({"type": "relay", "name": "flux_capacitor", "on": False})
    sim2.step()
    assert "relay_command" not in _event_names(sim2)


def test_mode_change_event():
    cfg = RunConfig(scenario=SHORT, nav=NavSettings(mode="teleop"), duration_s=5.0)
    sim = Simulation(cfg)
    sim.submit({"type": "mode", "mode": "waypoint"})
    sim.step()
    assert sim.cfg.nav.mode == "waypoint"
    assert "mode_change" in _event_names(sim)
    # same mode or junk mode: no event
    sim.submit({"type": "mode", "mode": "waypoint"})
    sim.submit({"type": "mode", "mode": "ballistic"})
    sim.step()
    assert _event_names(sim).count("mode_change") == 1


def test_malformed_teleop_ignored():
    cfg = RunConfig(scenario=SHORT, nav=NavSettings(mode="teleop"), duration_s=5.0)
    sim = Simulation(cfg)
    sim.submit({"type": "teleop", "axis_forward": "sideways", "deadman": True})
    sim.submit({"type": "unknown_kind"})
    sim.step()  # nothing raises, nothing moves
    assert sim.setpoint.v == 0.0


# --- logs, metrics, replay --------------------------------------------------------


def _run_with_log(cfg: RunConfig):
    buf = io.StringIO()
    writer = RunLogWriter(buf, seed=cfg.scenario.seed, config=cfg.to_dict())
    sim = Simulation(cfg, log=writer)
    result = sim.run()
    return result, buf.getvalue()


def test_replay_reproduces_run_bit_for_bit():
    result, text = _run_with_log(_waypoint_cfg())
    header, records = read_run_log(text.splitlines())
    replayed = replay_log(header, records)
    assert replayed.final_pose == result.final_pose
    assert replayed.metrics == result.metrics
    assert replayed.sim_time_s == result.sim_time_s

    # replaying with a fresh writer reproduces the log byte for byte
    buf2 = io.StringIO()
    writer2 = RunLogWriter(buf2, seed=header["seed"], config=header["config"])
    replay_log(header, records, log=writer2)
    assert buf2.getvalue() == text


def test_replay_covers_early_stop_runs():
    result, text = _run_with_log(_waypoint_cfg(waypoints=((1.5, 0.0),)))
    header, records = read_run_log(text.splitlines())
    replayed = replay_log(header, records)
    assert replayed.final_pose == result.final_pose
    assert replayed.sim_time_s == result.sim_time_s


def test_metrics_from_log_matches_live():
    result, text = _run_with_log(_waypoint_cfg())
    header, records = read_run_log(text.splitlines())
    recomputed = metrics_from_log(header, records)
    assert recomputed == result.metrics  # float-identical accumulation


def test_metrics_from_log_rejects_empty():
    with pytest.raises(ConfigError):
        metrics_from_log({"config": RunConfig().to_dict()}, [])
