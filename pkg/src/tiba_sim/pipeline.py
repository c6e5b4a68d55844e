"""Command pipeline and run recording.

Mirrors the onboard message path: operator input becomes a velocity
setpoint (teleop_box), the setpoint becomes per-side wheel speeds
(twist_converter), wheel speeds cross the bus as fixed-layout frames
(saga_base_drive_chain), and the electronics box (vss) meters every rail.
Runs serialize to newline-delimited self-describing records so a log can
be diffed, streamed, and replayed bit for bit.
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
import struct
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .drivetrain import TwistLimits
from .sensors import LidarScan, ThermalImage
from .simcore import Twist, WheelSpeeds
from .world import ConfigError

GAIN_STEPS = ("none", "up", "down")


@dataclass(frozen=True)
class TeleopInput:
    """One operator input sample (normalized axes, safety switch, gain)."""

    axis_forward: float = 0.0
    axis_turn: float = 0.0
    deadman: bool = False
    gain_step: str = "none"

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "axis_forward", min(max(self.axis_forward, -1.0), 1.0)
        )
        object.__setattr__(self, "axis_turn", min(max(self.axis_turn, -1.0), 1.0))
        if self.gain_step not in GAIN_STEPS:
            raise ValueError(f"gain_step must be one of {GAIN_STEPS}")


@dataclass(frozen=True)
class TeleopConfig:
    v_step_m_s: float = 0.02  # setpoint increment per tick at full deflection
    omega_step_rad_s: float = 0.05
    gain_factor: float = 1.25  # per gain_step press
    gain_scale_min: float = 0.25
    gain_scale_max: float = 4.0


def teleop_map(
    inp: TeleopInput,
    prev: Twist,
    cfg: TeleopConfig,
    limits: TwistLimits,
    gain_scale: float = 1.0,
) -> Twist:
    """Increment the velocity setpoint from one input tick.

    Releasing the deadman zeroes the setpoint immediately, regardless of
    axes.  Otherwise each axis nudges its setpoint by a configured step
    (scaled by the current gain) and the result clamps to the drivetrain
    envelope.
    """
    if not inp.deadman:
        return Twist(v=0.0, omega=0.0)
    v = prev.v + inp.axis_forward * cfg.v_step_m_s * gain_scale
    omega = prev.omega + inp.axis_turn * cfg.omega_step_rad_s * gain_scale
    v = min(max(v, -limits.v_max_m_s), limits.v_max_m_s)
    omega = min(max(omega, -limits.omega_max_rad_s), limits.omega_max_rad_s)
    return Twist(v=v, omega=omega)


class TeleopMapper:
    """Stateful wrapper holding the setpoint and gain scale between ticks."""

    def __init__(self, cfg: TeleopConfig, limits: TwistLimits) -> None:
        self.cfg = cfg
        self.limits = limits
        self.gain_scale = 1.0
        self.setpoint = Twist(v=0.0, omega=0.0)

    def apply(self, inp: TeleopInput) -> Twist:
        if inp.gain_step == "up":
            self.gain_scale = min(
                self.cfg.gain_scale_max, self.gain_scale * self.cfg.gain_factor
            )
        elif inp.gain_step == "down":
            self.gain_scale = max(
                self.cfg.gain_scale_min, self.gain_scale / self.cfg.gain_factor
            )
        self.setpoint = teleop_map(
            inp, self.setpoint, self.cfg, self.limits, self.gain_scale
        )
        return self.setpoint

    def zero(self) -> Twist:
        self.setpoint = Twist(v=0.0, omega=0.0)
        return self.setpoint


# --- bus frames ----------------------------------------------------------------


class MalformedFrame(ValueError):
    """Frame violates the fixed wheel-command layout."""


WHEEL_CMD_FRAME_ID = 0x201
_INT32_MAX = 2**31 - 1
_INT32_MIN = -(2**31)


@dataclass(frozen=True)
class BusFrame:
    frame_id: int  # 11-bit identifier
    payload: bytes  # 0..8 bytes

    def __post_init__(self) -> None:
        if not 0 <= self.frame_id < 2048:
            raise MalformedFrame(f"frame id {self.frame_id} not 11-bit")
        if len(self.payload) > 8:
            raise MalformedFrame(f"payload of {len(self.payload)} bytes > 8")


def encode_wheel_command(
    wheels: WheelSpeeds, frame_id: int = WHEEL_CMD_FRAME_ID
) -> BusFrame:
    """Pack side speeds as two little-endian signed int32 in milli-rad/s."""
    left = min(max(int(round(wheels.left * 1000.0)), _INT32_MIN), _INT32_MAX)
    right = min(max(int(round(wheels.right * 1000.0)), _INT32_MIN), _INT32_MAX)
    return BusFrame(frame_id=frame_id, payload=struct.pack("<ii", left, right))


def decode_wheel_command(frame: BusFrame) -> WheelSpeeds:
    """Exact inverse of encode up to the 1 milli-rad/s quantization."""
    if len(frame.payload) != 8:
        raise MalformedFrame(
            f"wheel command payload must be 8 bytes, got {len(frame.payload)}"
        )
    left, right = struct.unpack("<ii", frame.payload)
    return WheelSpeeds(left=left / 1000.0, right=right / 1000.0)


# --- electronics box (power / relays / internal climate) -----------------------


@dataclass(frozen=True)
class DeviceDraw:
    bus: str  # "12" or "48"
    amps: float

    def __post_init__(self) -> None:
        if self.bus not in ("12", "48"):
            raise ValueError("bus must be '12' or '48'")
        if self.amps < 0.0:
            raise ValueError("amps must be >= 0")


def default_device_draws() -> dict[str, DeviceDraw]:
    return {
        "drive": DeviceDraw("48", 0.4),  # motor driver idle; motors add on top
        "lidar": DeviceDraw("12", 0.5),
        "thermal_cam": DeviceDraw("12", 0.3),
        "solar_sensor": DeviceDraw("12", 0.05),
        "ht_sensor": DeviceDraw("12", 0.02),
    }


@dataclass(frozen=True)
class VssConfig:
    battery_capacity_ah: float = 30.0
    battery_voltage_nominal: float = 48.0
    battery_voltage_full: float = 56.0
    battery_voltage_empty: float = 40.0
    bus48_voltage: float = 48.0  # regulated rail used for power bookkeeping
    bus12_voltage: float = 12.0
    computer_idle_a: float = 1.2  # always-on 12 V load
    motor_a_per_rad_s: float = 0.35  # 48 V draw per rad/s of summed wheel speed
    initial_state_of_charge: float = 1.0
    temp_rise_c_per_w: float = 0.02  # steady-state box heating per watt
    temp_tau_s: float = 60.0
    device_draws: dict[str, DeviceDraw] = field(default_factory=default_device_draws)

    @property
    def capacity_wh(self) -> float:
        return self.battery_capacity_ah * self.battery_voltage_nominal


@dataclass
class VssState:
    battery_voltage: float
    state_of_charge: float  # [0, 1]
    bus48_current: float
    bus12_current: float
    relays: dict[str, bool]
    internal_temp_c: float
    internal_humidity_pct: float


def initial_vss_state(
    cfg: VssConfig, ambient: tuple[float, float], relays_on: bool = True
) -> VssState:
    soc = cfg.initial_state_of_charge
    return VssState(
        battery_voltage=_soc_voltage(cfg, soc),
        state_of_charge=soc,
        bus48_current=0.0,
        bus12_current=0.0,
        relays={name: relays_on for name in cfg.device_draws},
        internal_temp_c=ambient[0],
        internal_humidity_pct=ambient[1],
    )


def _soc_voltage(cfg: VssConfig, soc: float) -> float:
    return cfg.battery_voltage_empty + (
        cfg.battery_voltage_full - cfg.battery_voltage_empty
    ) * soc


def vss_step(
    state: VssState,
    relay_cmds: dict[str, bool] | None,
    wheel_speeds: tuple[float, float],
    ambient: tuple[float, float],
    cfg: VssConfig,
    dt: float,
) -> tuple[VssState, dict, list[str]]:
    """Advance the electronics box by dt.

    Bus currents are the sum of enabled device draws; the drive relay also
    gates the speed-dependent motor draw on the 48 V rail.  State of charge
    integrates rail power against capacity; voltage follows SoC linearly;
    box temperature relaxes toward ambient plus a load-dependent rise.
    Returns the new state, a telemetry payload, and event names (at most
    ["power_exhausted"], emitted once when charge runs out).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    relays = dict(state.relays)
    if relay_cmds:
        for name, on in relay_cmds.items():
            if name not in cfg.device_draws:
                raise ValueError(f"unknown relay '{name}'")
            relays[name] = bool(on)

    i48 = 0.0
    i12 = cfg.computer_idle_a
    for name, draw in cfg.device_draws.items():
        if not relays.get(name, False):
            continue
        if draw.bus == "48":
            i48 += draw.amps
        else:
            i12 += draw.amps
    if relays.get("drive", False):
        i48 += cfg.motor_a_per_rad_s * (abs(wheel_speeds[0]) + abs(wheel_speeds[1]))

    power_w = cfg.bus48_voltage * i48 + cfg.bus12_voltage * i12
    soc = state.state_of_charge - power_w * dt / (3600.0 * cfg.capacity_wh)
    events: list[str] = []
    if soc <= 0.0:
        soc = 0.0
        if state.state_of_charge > 0.0:
            events.append("power_exhausted")

    ambient_t, ambient_rh = ambient
    relax = 1.0 - math.exp(-dt / cfg.temp_tau_s)
    temp_target = ambient_t + cfg.temp_rise_c_per_w * power_w
    temp = state.internal_temp_c + (temp_target - state.internal_temp_c) * relax
    humidity = state.internal_humidity_pct + (
        ambient_rh - state.internal_humidity_pct
    ) * relax

    new_state = VssState(
        battery_voltage=_soc_voltage(cfg, soc),
        state_of_charge=soc,
        bus48_current=i48,
        bus12_current=i12,
        relays=relays,
        internal_temp_c=temp,
        internal_humidity_pct=humidity,
    )
    telemetry = {
        "battery_voltage": new_state.battery_voltage,
        "state_of_charge": soc,
        "bus48_current": i48,
        "bus12_current": i12,
        "power_w": power_w,
        "relays": dict(relays),
        "internal_temp_c": temp,
        "internal_humidity_pct": humidity,
    }
    return new_state, telemetry, events


# --- run log -------------------------------------------------------------------


class CorruptLog(ValueError):
    """Log violates the format: bad JSON, bad header, or time going backward."""


LOG_FORMAT = "tiba-runlog/1"
RECORD_KINDS = (
    "command",
    "pose",
    "wheel",
    "solar",
    "lidar",
    "thermal",
    "ht",
    "vss",
    "event",
)


@dataclass(frozen=True)
class RunRecord:
    timestamp: float  # sim time [s]
    kind: str
    payload: dict

    def __post_init__(self) -> None:
        if self.kind not in RECORD_KINDS:
            raise ValueError(f"unknown record kind '{self.kind}'")


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def serialize_record(rec: RunRecord) -> str:
    return json.dumps(
        {"t": rec.timestamp, "kind": rec.kind, "data": rec.payload},
        separators=(",", ":"),
    )


def parse_record(line: str) -> RunRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptLog(f"unparseable record line: {exc}") from exc
    if not isinstance(obj, dict) or not {"t", "kind", "data"} <= set(obj):
        raise CorruptLog("record line missing t/kind/data")
    try:
        return RunRecord(timestamp=float(obj["t"]), kind=obj["kind"], payload=obj["data"])
    except ValueError as exc:
        raise CorruptLog(str(exc)) from exc


class RunLogWriter:
    """Appends records to a stream, enforcing nondecreasing timestamps."""

    def __init__(self, stream: IO[str], seed: int, config: dict) -> None:
        self._stream = stream
        self._last_t = -math.inf
        header = {
            "format": LOG_FORMAT,
            "seed": seed,
            "config_hash": config_hash(config),
            "config": config,
        }
        self._stream.write(json.dumps(header, separators=(",", ":")) + "\n")

    def append(self, rec: RunRecord) -> None:
        if rec.timestamp < self._last_t:
            raise CorruptLog(
                f"timestamp {rec.timestamp} after {self._last_t} goes backward"
            )
        self._last_t = rec.timestamp
        self._stream.write(serialize_record(rec) + "\n")

    def close(self) -> None:
        self._stream.close()


def read_run_log(lines: Iterable[str]) -> tuple[dict, list[RunRecord]]:
    """Parse a full log; validates header, kinds, and time ordering."""
    it = iter(lines)
    try:
        first = next(it)
    except StopIteration:
        # Nothing was ever written: a configuration problem, not corruption.
        raise ConfigError("empty log") from None
    try:
        header = json.loads(first)
    except json.JSONDecodeError as exc:
        raise CorruptLog(f"unparseable header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != LOG_FORMAT:
        raise CorruptLog("missing or unknown log format header")
    records = []
    last_t = -math.inf
    for line in it:
        if not line.strip():
            continue
        rec = parse_record(line)
        if rec.timestamp < last_t:
            raise CorruptLog(
                f"timestamp {rec.timestamp} after {last_t} goes backward"
            )
        last_t = rec.timestamp
        records.append(rec)
    return header, records


def read_run_log_file(path: str) -> tuple[dict, list[RunRecord]]:
    with open(path, "r", encoding="utf-8") as fh:
        return read_run_log(fh)


# --- frame payload helpers ------------------------------------------------------


def thermal_payload(img: ThermalImage) -> dict:
    """8-bit normalized thumbnail encoding shared by log and wire."""
    t_min = float(img.temps_c.min())
    t_max = float(img.temps_c.max())
    span = t_max - t_min
    if span <= 0.0:
        quantized = np.zeros(img.temps_c.shape, dtype=np.uint8)
    else:
        quantized = np.round((img.temps_c - t_min) / span * 255.0).astype(np.uint8)
    return {
        "width": img.width,
        "height": img.height,
        "min_c": t_min,
        "max_c": t_max,
        "b64": base64.b64encode(quantized.tobytes()).decode("ascii"),
    }


def lidar_payload(scan: LidarScan) -> dict:
    return {
        "angle_min": scan.angle_min_rad,
        "angle_max": scan.angle_max_rad,
        "max_range": scan.max_range_m,
        "ranges": [float(r) for r in scan.ranges],
    }
