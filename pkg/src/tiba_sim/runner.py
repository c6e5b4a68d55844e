"""Simulation runner: steps the full stack, records runs, replays them.

One Simulation owns all state and advances at a fixed dt (default 10 ms).
Control, sensing, and telemetry run on a 10x slower cadence; the cabin
probe at 1 Hz.  External commands (teleop, relay, mode) enter through a
thread-safe queue and are applied at the next control tick, so the step
loop itself never blocks.

Replay re-drives the same dynamics from the logged command setpoints; all
sensor noise lives in per-frame substreams, so skipping sensor rendering
during replay cannot shift anything the dynamics consume.
"""

from __future__ import annotations

import dataclasses
import math
import queue
import time
from dataclasses import dataclass, field
from typing import Callable

from . import nav as navmod
from . import seeding
from .drivetrain import TwistLimits, twist_limits
from .pipeline import (
    CorruptLog,
    DeviceDraw,
    RunLogWriter,
    RunRecord,
    TeleopConfig,
    TeleopInput,
    TeleopMapper,
    VssConfig,
    VssState,
    decode_wheel_command,
    encode_wheel_command,
    initial_vss_state,
    lidar_payload,
    thermal_payload,
    vss_step,
)
from .sensors import (
    HtConfig,
    LidarConfig,
    OdometryEstimate,
    SolarConfig,
    ThermalConfig,
    ht_sample,
    lidar_scan,
    odometry_update,
    solar_estimate,
    solar_project,
    solar_synthesize,
    thermal_render,
)
from .simcore import (
    BRAKE_TAU_S,
    DEFAULT_MOTOR_TAU_S,
    MotorSideState,
    Pose,
    Twist,
    WheelSpeeds,
    actual_twist,
    collide_stems,
    integrate_pose,
    step_motors,
    twist_to_wheel_speeds,
)
from .world import (
    ConfigError,
    HeightClass,
    OutOfBounds,
    RobotParams,
    ScenarioSpec,
    SunState,
    TunnelScenario,
    generate_tunnel,
    scenario_spec_from_dict,
    surface_at,
)

NAV_MODES = ("thermal", "lidar", "waypoint", "teleop")


@dataclass(frozen=True)
class NavSettings:
    mode: str = "teleop"
    k_y: float = 1.5
    k_theta: float = 2.0
    v_ref_m_s: float = 0.8
    lookahead_m: float = 2.0
    arrival_radius_m: float = 0.3

    def __post_init__(self) -> None:
        if self.mode not in NAV_MODES:
            raise ConfigError(f"nav mode must be one of {NAV_MODES}")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved description of one run; serializes into log headers."""

    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    robot: RobotParams = field(default_factory=RobotParams)
    nav: NavSettings = field(default_factory=NavSettings)
    solar: SolarConfig = field(default_factory=SolarConfig)
    lidar: LidarConfig = field(default_factory=LidarConfig)
    thermal: ThermalConfig = field(default_factory=ThermalConfig)
    ht: HtConfig = field(default_factory=HtConfig)
    vss: VssConfig = field(default_factory=VssConfig)
    teleop: TeleopConfig = field(default_factory=TeleopConfig)
    start_x_m: float = 0.0
    start_y_m: float = 0.0
    start_theta_rad: float = 0.0
    duration_s: float = 120.0
    dt_s: float = 0.01
    control_period_s: float = 0.1
    ht_period_s: float = 1.0
    hold_time_s: float = 0.5  # keep last command this long after nav loss
    heartbeat_timeout_s: float = 0.4
    motor_tau_s: float = DEFAULT_MOTOR_TAU_S
    brake_tau_s: float = BRAKE_TAU_S
    ambient_temp_c: float = 30.0
    ambient_rh_pct: float = 70.0
    completion_margin_m: float = 0.5
    use_sun_heading_init: bool = True
    waypoints: tuple[tuple[float, float], ...] | None = None
    gravity_m_s2: float = 9.8

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["scenario"] = self.scenario.to_dict()
        d["waypoints"] = (
            None if self.waypoints is None else [list(p) for p in self.waypoints]
        )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        kw = dict(d)
        kw["scenario"] = ScenarioSpec.from_dict(kw["scenario"])
        kw["robot"] = RobotParams(**kw["robot"])
        kw["nav"] = NavSettings(**kw["nav"])
        kw["solar"] = SolarConfig(**kw["solar"])
        kw["lidar"] = LidarConfig(**kw["lidar"])
        kw["thermal"] = ThermalConfig(**kw["thermal"])
        kw["ht"] = HtConfig(**kw["ht"])
        vss_kw = dict(kw["vss"])
        vss_kw["device_draws"] = {
            name: DeviceDraw(**draw) for name, draw in vss_kw["device_draws"].items()
        }
        kw["vss"] = VssConfig(**vss_kw)
        kw["teleop"] = TeleopConfig(**kw["teleop"])
        if kw.get("waypoints") is not None:
            kw["waypoints"] = tuple((float(x), float(y)) for x, y in kw["waypoints"])
        return cls(**kw)


def build_run_config(scenario_keys: dict, **overrides) -> RunConfig:
    """Assemble a RunConfig from parsed scenario-file keys plus overrides.

    Overrides (from CLI flags) win over file keys, which win over defaults.
    """
    spec = scenario_spec_from_dict(scenario_keys)
    nav_kw = {}
    run_kw: dict = {}
    key_map = {
        "nav.mode": ("mode", str),
        "nav.k_y": ("k_y", float),
        "nav.k_theta": ("k_theta", float),
        "nav.v_ref": ("v_ref_m_s", float),
        "nav.lookahead_m": ("lookahead_m", float),
        "nav.arrival_radius_m": ("arrival_radius_m", float),
    }
    for key, (name, cast) in key_map.items():
        if key in scenario_keys:
            nav_kw[name] = cast(scenario_keys[key])
    for key, name in (
        ("start_x_m", "start_x_m"),
        ("start_y_m", "start_y_m"),
        ("start_theta_rad", "start_theta_rad"),
        ("duration_s", "duration_s"),
    ):
        if key in scenario_keys:
            run_kw[name] = float(scenario_keys[key])
    if "waypoint" in scenario_keys:
        run_kw["waypoints"] = tuple(scenario_keys["waypoint"])

    if "seed" in overrides and overrides["seed"] is not None:
        spec = dataclasses.replace(spec, seed=int(overrides.pop("seed")))
    else:
        overrides.pop("seed", None)
    if "mode" in overrides and overrides["mode"] is not None:
        nav_kw["mode"] = overrides.pop("mode")
    else:
        overrides.pop("mode", None)
    for name, value in overrides.items():
        if value is not None:
            run_kw[name] = value
    try:
        return RunConfig(scenario=spec, nav=NavSettings(**nav_kw), **run_kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class RunMetrics:
    cross_track_rms_m: float
    cross_track_max_m: float
    stem_collisions: int
    distance_traveled_m: float
    completion: bool
    energy_used_wh: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class RunResult:
    final_pose: Pose
    metrics: RunMetrics
    sim_time_s: float
    steps: int
    events: list[tuple[float, str]]


class Simulation:
    """Owns all run state; step() advances exactly one dt."""

    def __init__(
        self,
        cfg: RunConfig,
        log: RunLogWriter | None = None,
        telemetry_sink: Callable[[dict], None] | None = None,
        replay_commands: list[tuple[float, float, float, bool]] | None = None,
        replay_relays: list[tuple[float, str, bool]] | None = None,
        end_time_s: float | None = None,
    ) -> None:
        self.cfg = cfg
        self.scenario: TunnelScenario = generate_tunnel(cfg.scenario)
        self.params: RobotParams = cfg.robot
        self.limits: TwistLimits = twist_limits(cfg.robot)
        self.sun: SunState = cfg.scenario.sun()
        self.log = log
        self.telemetry_sink = telemetry_sink
        self.replay_commands = list(replay_commands) if replay_commands else None
        self.replay_relays = list(replay_relays) if replay_relays else None
        self.end_time_s = end_time_s

        self.t = 0.0
        self.steps = 0
        self.pose = Pose(cfg.start_x_m, cfg.start_y_m, cfg.start_theta_rad)
        self.left = MotorSideState()
        self.right = MotorSideState()
        self.setpoint = Twist(0.0, 0.0)
        self.cmd_wheels = WheelSpeeds(0.0, 0.0)
        self.braking = False
        self.done = False
        self.completion = False

        ambient = (cfg.ambient_temp_c, cfg.ambient_rh_pct)
        self.vss: VssState = initial_vss_state(cfg.vss, ambient)
        self.teleop = TeleopMapper(cfg.teleop, self.limits)
        self.last_teleop_t: float | None = None

        self.centerline_cfg = navmod.CenterlineConfig(camera=cfg.thermal)
        self.corridor_cfg = navmod.CorridorConfig(
            nominal_row_spacing_m=cfg.scenario.row_spacing_m
        )
        self.gains = navmod.SteerGains(k_y=cfg.nav.k_y, k_theta=cfg.nav.k_theta)
        self.pursuit_cfg = navmod.PursuitConfig(
            lookahead_m=cfg.nav.lookahead_m,
            arrival_radius_m=cfg.nav.arrival_radius_m,
            v_ref_m_s=cfg.nav.v_ref_m_s,
        )
        self.waypoints = self._resolve_waypoints()
        self.nav_lost_since: float | None = None

        self._inbox: queue.Queue = queue.Queue()
        self._pending_relays: dict[str, bool] = {}
        self._control_every = max(1, round(cfg.control_period_s / cfg.dt_s))
        self._ht_every = max(1, round(cfg.ht_period_s / cfg.dt_s))
        self._frame_counters = {"lidar": 0, "thermal": 0, "solar": 0, "ht": 0}
        self.collided: set[int] = set()
        self.events: list[tuple[float, str]] = []

        self._y_sq_sum = 0.0
        self._y_abs_max = 0.0
        self._pose_samples = 0
        self._distance = 0.0

        self.odometry = OdometryEstimate(
            pose=Pose(cfg.start_x_m, cfg.start_y_m, self._initial_heading()),
            v=0.0,
            omega=0.0,
        )
        self._check_geometry()

    # -- setup helpers --

    def _resolve_waypoints(self) -> list[tuple[float, float]]:
        if self.cfg.waypoints is not None:
            return list(self.cfg.waypoints)
        # Default: centerline samples every meter up to the tunnel end.
        length = self.cfg.scenario.length_m
        n = max(2, int(math.ceil(length)) + 1)
        return [(min(float(i), length), 0.0) for i in range(n)]

    def _initial_heading(self) -> float:
        """Believed start heading: sun-aided when a valid reading exists."""
        if not (self.cfg.use_sun_heading_init and self.vss.relays.get("solar_sensor")):
            return self.cfg.start_theta_rad
        truth = solar_project(self.pose.theta, self.sun)
        reading = solar_synthesize(truth, self.sun, self.cfg.solar)
        if not reading.valid:
            return self.cfg.start_theta_rad
        try:
            angles = solar_estimate(reading, self.cfg.solar)
            return navmod.sun_heading(angles, self.sun)
        except (navmod.IllConditioned, ValueError):
            return self.cfg.start_theta_rad

    def _check_geometry(self) -> None:
        spec = self.cfg.scenario
        if (
            spec.height_class in (HeightClass.H1, HeightClass.H2)
            and spec.row_spacing_m <= self.params.body_width_m
        ):
            self._event("tight_scenario", {
                "row_spacing_m": spec.row_spacing_m,
                "body_width_m": self.params.body_width_m,
            })

    # -- external command entry (thread-safe) --

    def submit(self, message: dict) -> None:
        """Queue a wire command ({type: teleop|relay|mode, ...}) for the
        next control tick."""
        self._inbox.put(message)

    # -- record/telemetry plumbing --

    def _record(self, kind: str, payload: dict) -> None:
        if self.log is not None:
            self.log.append(RunRecord(timestamp=self.t, kind=kind, payload=payload))

    def _publish(self, frame: dict) -> None:
        if self.telemetry_sink is not None:
            self.telemetry_sink(frame)

    def _event(self, name: str, payload: dict | None = None) -> None:
        self.events.append((self.t, name))
        data = {"name": name}
        if payload:
            data.update(payload)
        self._record("event", data)
        self._publish({"type": "event", "t": self.t, **data})

    def _rng(self, stream: int, purpose: str):
        idx = self._frame_counters[purpose]
        self._frame_counters[purpose] = idx + 1
        return seeding.substream(self.cfg.scenario.seed, stream, idx)

    # -- per-step work --

    def step(self) -> None:
        if self.done:
            return
        control_tick = self.steps % self._control_every == 0
        if control_tick:
            self._drain_inbox()
            self._control()
        self._advance_dynamics()
        if control_tick:
            self._sense_and_meter()
        if self.steps % self._ht_every == 0:
            self._sample_ht()
        self._check_collisions()
        self._check_completion()
        self.t += self.cfg.dt_s
        self.steps += 1
        if self.t >= self.cfg.duration_s - 1e-12:
            self.done = True
        if self.end_time_s is not None and self.t > self.end_time_s + 0.5 * self.cfg.dt_s:
            # Replay: the source run stopped here (arrival, exhaustion, ...).
            self.done = True

    def _drain_inbox(self) -> None:
        while True:
            try:
                msg = self._inbox.get_nowait()
            except queue.Empty:
                return
            kind = msg.get("type")
            if kind == "teleop":
                try:
                    inp = TeleopInput(
                        axis_forward=float(msg.get("axis_forward", 0.0)),
                        axis_turn=float(msg.get("axis_turn", 0.0)),
                        deadman=bool(msg.get("deadman", False)),
                        gain_step=msg.get("gain_step", "none"),
                    )
                except (TypeError, ValueError):
                    continue
                self.teleop.apply(inp)
                self.last_teleop_t = self.t
                self.braking = not inp.deadman
            elif kind == "relay":
                name = msg.get("name")
                if isinstance(name, str) and name in self.cfg.vss.device_draws:
                    on = bool(msg.get("on", False))
                    self._pending_relays[name] = on
                    self._event("relay_command", {"relay": name, "on": on})
            elif kind == "mode":
                mode = msg.get("mode")
                if mode in NAV_MODES and mode != self.cfg.nav.mode:
                    self.cfg = dataclasses.replace(
                        self.cfg, nav=dataclasses.replace(self.cfg.nav, mode=mode)
                    )
                    self.nav_lost_since = None
                    self._event("mode_change", {"mode": mode})

    def _control(self) -> None:
        if self.replay_commands is not None:
            self._apply_replay_inputs()
        else:
            mode = self.cfg.nav.mode
            if mode == "teleop":
                self._control_teleop()
            else:
                self._control_autonomous(mode)
        self._record(
            "command",
            {"v": self.setpoint.v, "omega": self.setpoint.omega, "brake": self.braking},
        )
        frame = encode_wheel_command(twist_to_wheel_speeds(self.setpoint, self.params))
        self.cmd_wheels = decode_wheel_command(frame)

    def _apply_replay_inputs(self) -> None:
        while self.replay_relays and self.replay_relays[0][0] <= self.t + 1e-9:
            _, name, on = self.replay_relays.pop(0)
            self._pending_relays[name] = on
        while self.replay_commands and self.replay_commands[0][0] <= self.t + 1e-9:
            _, v, omega, brake = self.replay_commands.pop(0)
            self.setpoint = Twist(v=v, omega=omega)
            self.braking = brake

    def _control_teleop(self) -> None:
        timed_out = (
            self.last_teleop_t is not None
            and (self.t - self.last_teleop_t) > self.cfg.heartbeat_timeout_s
        )
        if timed_out and (
            self.teleop.setpoint.v != 0.0 or self.teleop.setpoint.omega != 0.0
        ):
            self.teleop.zero()
            self.braking = True
            self._event("heartbeat_lost")
        self.setpoint = self.teleop.setpoint

    def _control_autonomous(self, mode: str) -> None:
        try:
            command = self._nav_command(mode)
        except (navmod.NoPath, navmod.NoCorridor) as exc:
            self._nav_lost(str(exc))
            return
        if command is None:
            # Waypoint arrival: stop and finish the run.
            self.setpoint = Twist(0.0, 0.0)
            self.braking = True
            if not self.completion:
                self._event("arrived")
                self.done = True
            return
        if self.nav_lost_since is not None:
            self.nav_lost_since = None
            self._event("nav_recovered")
        self.braking = False
        self.setpoint = command

    def _nav_command(self, mode: str) -> Twist | None:
        if mode == "thermal":
            if not self.vss.relays.get("thermal_cam", False):
                raise navmod.NoPath("thermal camera unpowered")
            img = thermal_render(
                self.pose,
                self.scenario,
                self.sun,
                self.cfg.thermal,
                self._rng(seeding.STREAM_THERMAL, "thermal"),
            )
            self._record("thermal", thermal_payload(img))
            self._publish({"type": "thermal", "t": self.t, **thermal_payload(img)})
            est = navmod.thermal_centerline(img, self.centerline_cfg)
            return navmod.corridor_steer(
                est, self.gains, self.cfg.nav.v_ref_m_s, self.limits
            )
        if mode == "lidar":
            if not self.vss.relays.get("lidar", False):
                raise navmod.NoCorridor("lidar unpowered")
            scan = lidar_scan(
                self.pose,
                self.scenario,
                self.cfg.lidar,
                self._rng(seeding.STREAM_LIDAR, "lidar"),
            )
            self._record("lidar", lidar_payload(scan))
            self._publish({"type": "scan", "t": self.t, **lidar_payload(scan)})
            est = navmod.lidar_corridor(scan, self.corridor_cfg)
            return navmod.corridor_steer(
                est, self.gains, self.cfg.nav.v_ref_m_s, self.limits
            )
        if mode == "waypoint":
            return navmod.waypoint_steer(
                self.odometry.pose, self.waypoints, self.pursuit_cfg, self.limits
            )
        raise ConfigError(f"unknown nav mode '{mode}'")

    def _nav_lost(self, reason: str) -> None:
        if self.nav_lost_since is None:
            self.nav_lost_since = self.t
            self._event("nav_lost", {"reason": reason})
        if (self.t - self.nav_lost_since) >= self.cfg.hold_time_s:
            self.setpoint = Twist(0.0, 0.0)
            self.braking = True
        # else: hold the previous setpoint unchanged.

    def _advance_dynamics(self) -> None:
        try:
            surface = surface_at(self.scenario, self.pose.x, self.pose.y)
        except OutOfBounds:
            self._event("out_of_bounds")
            self.setpoint = Twist(0.0, 0.0)
            self.done = True
            return
        drive_on = self.vss.relays.get("drive", False)
        cmd = self.cmd_wheels if drive_on else WheelSpeeds(0.0, 0.0)
        tau = self.cfg.brake_tau_s if (self.braking or not drive_on) else self.cfg.motor_tau_s
        self.left, self.right, (dl, dr) = step_motors(
            self.left,
            self.right,
            cmd,
            surface,
            self.params,
            self.cfg.dt_s,
            time_constant=tau,
            gravity=self.cfg.gravity_m_s2,
        )
        twist = actual_twist(self.left, self.right, self.params)
        self.pose = integrate_pose(self.pose, twist, self.cfg.dt_s)
        self.odometry = odometry_update(self.odometry, dl, dr, self.params, self.cfg.dt_s)
        self._record(
            "wheel",
            {
                "cmd_left": cmd.left,
                "cmd_right": cmd.right,
                "left": self.left.speed_rad_s,
                "right": self.right.speed_rad_s,
                "ticks_left": dl,
                "ticks_right": dr,
            },
        )
        self._record(
            "pose",
            {
                "x": self.pose.x,
                "y": self.pose.y,
                "theta": self.pose.theta,
                "v": twist.v,
                "omega": twist.omega,
            },
        )
        self._y_sq_sum += self.pose.y * self.pose.y
        self._y_abs_max = max(self._y_abs_max, abs(self.pose.y))
        self._pose_samples += 1
        self._distance += abs(twist.v) * self.cfg.dt_s
        self._publish(
            {
                "type": "pose",
                "t": self.t,
                "x": self.pose.x,
                "y": self.pose.y,
                "theta": self.pose.theta,
                "v": twist.v,
                "omega": twist.omega,
            }
        )

    def _sense_and_meter(self) -> None:
        if self.vss.relays.get("solar_sensor", False):
            angles = solar_project(self.pose.theta, self.sun)
            reading = solar_synthesize(angles, self.sun, self.cfg.solar)
            self._record(
                "solar",
                {
                    "v1": reading.v1,
                    "v2": reading.v2,
                    "v3": reading.v3,
                    "v4": reading.v4,
                    "valid": reading.valid,
                },
            )
        relay_cmds = self._pending_relays or None
        self._pending_relays = {}
        self.vss, telemetry, vss_events = vss_step(
            self.vss,
            relay_cmds,
            (self.left.speed_rad_s, self.right.speed_rad_s),
            (self.cfg.ambient_temp_c, self.cfg.ambient_rh_pct),
            self.cfg.vss,
            self.cfg.control_period_s,
        )
        self._record("vss", telemetry)
        self._publish({"type": "vss", "t": self.t, **telemetry})
        for name in vss_events:
            self._event(name)
            if name == "power_exhausted":
                self.setpoint = Twist(0.0, 0.0)
                self.braking = True
                self.done = True

    def _sample_ht(self) -> None:
        if not self.vss.relays.get("ht_sensor", False):
            return
        reading = ht_sample(
            (self.cfg.ambient_temp_c, self.cfg.ambient_rh_pct),
            self.cfg.ht,
            self._rng(seeding.STREAM_HT, "ht"),
        )
        self._record(
            "ht",
            {"temperature_c": reading.temperature_c, "humidity_pct": reading.humidity_pct},
        )

    def _check_collisions(self) -> None:
        hits = collide_stems(self.pose, self.params, self.scenario.all_stems())
        for idx in hits:
            i = int(idx)
            if i not in self.collided:
                self.collided.add(i)
                stem = self.scenario.all_stems()[i]
                self._event(
                    "stem_collision",
                    {"stem": i, "x": float(stem[0]), "y": float(stem[1])},
                )

    def _check_completion(self) -> None:
        if self.completion:
            return
        goal = self.cfg.scenario.length_m - self.cfg.completion_margin_m
        if self.pose.x >= goal:
            self.completion = True
            self._event("completed")
            self.done = True

    # -- run loops --

    def run(self, realtime: bool = False, rate: float = 1.0) -> RunResult:
        """Advance to completion/duration; optionally paced to wall clock."""
        wall_start = time.monotonic()
        t_start = self.t
        while not self.done:
            self.step()
            if realtime:
                target = wall_start + (self.t - t_start) / max(rate, 1e-6)
                delay = target - time.monotonic()
                if delay > 0.0:
                    time.sleep(delay)
        return self.result()

    def result(self) -> RunResult:
        return RunResult(
            final_pose=self.pose,
            metrics=self.metrics(),
            sim_time_s=self.t,
            steps=self.steps,
            events=list(self.events),
        )

    def metrics(self) -> RunMetrics:
        rms = (
            math.sqrt(self._y_sq_sum / self._pose_samples)
            if self._pose_samples
            else 0.0
        )
        energy = (
            self.cfg.vss.initial_state_of_charge - self.vss.state_of_charge
        ) * self.cfg.vss.capacity_wh
        return RunMetrics(
            cross_track_rms_m=rms,
            cross_track_max_m=self._y_abs_max,
            stem_collisions=len(self.collided),
            distance_traveled_m=self._distance,
            completion=self.completion,
            energy_used_wh=energy,
        )


# --- log-side tools -------------------------------------------------------------


def metrics_from_log(header: dict, records: list[RunRecord]) -> RunMetrics:
    """Recompute RunMetrics purely from a log.

    Accumulates in exactly the order the live run did, so the result is
    float-identical to the metrics the run reported.
    """
    if not records:
        raise ConfigError("log holds no records")
    try:
        cfg = RunConfig.from_dict(header["config"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"log header lacks a usable config: {exc}") from exc
    y_sq_sum = 0.0
    y_abs_max = 0.0
    samples = 0
    distance = 0.0
    last_x = cfg.start_x_m
    collisions = 0
    last_soc = cfg.vss.initial_state_of_charge
    for rec in records:
        if rec.kind == "pose":
            y = float(rec.payload["y"])
            y_sq_sum += y * y
            y_abs_max = max(y_abs_max, abs(y))
            samples += 1
            distance += abs(float(rec.payload["v"])) * cfg.dt_s
            last_x = float(rec.payload["x"])
        elif rec.kind == "event" and rec.payload.get("name") == "stem_collision":
            collisions += 1
        elif rec.kind == "vss":
            last_soc = float(rec.payload["state_of_charge"])
    if samples == 0:
        raise ConfigError("log holds no pose records")
    completion = last_x >= cfg.scenario.length_m - cfg.completion_margin_m
    return RunMetrics(
        cross_track_rms_m=math.sqrt(y_sq_sum / samples),
        cross_track_max_m=y_abs_max,
        stem_collisions=collisions,
        distance_traveled_m=distance,
        completion=completion,
        energy_used_wh=(cfg.vss.initial_state_of_charge - last_soc)
        * cfg.vss.capacity_wh,
    )


def replay_log(
    header: dict, records: list[RunRecord], log: RunLogWriter | None = None
) -> RunResult:
    """Re-drive the dynamics from logged commands; bit-identical outcome."""
    try:
        cfg = RunConfig.from_dict(header["config"])
    except (KeyError, TypeError) as exc:
        raise CorruptLog(f"log header lacks a usable config: {exc}") from exc
    commands = [
        (
            rec.timestamp,
            float(rec.payload["v"]),
            float(rec.payload["omega"]),
            bool(rec.payload.get("brake", False)),
        )
        for rec in records
        if rec.kind == "command"
    ]
    relays = [
        (rec.timestamp, rec.payload["relay"], bool(rec.payload["on"]))
        for rec in records
        if rec.kind == "event" and rec.payload.get("name") == "relay_command"
    ]
    pose_times = [rec.timestamp for rec in records if rec.kind == "pose"]
    if not commands or not pose_times:
        raise CorruptLog("log holds no replayable command/pose records")
    sim = Simulation(
        cfg,
        log=log,
        replay_commands=commands,
        replay_relays=relays,
        end_time_s=pose_times[-1],
    )
    return sim.run()
