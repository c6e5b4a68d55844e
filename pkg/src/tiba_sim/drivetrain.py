"""Drivetrain sizing: can a motor/gearbox pair push the robot on a surface?

The sizing chain works per wheel and per side.  A quarter of the robot
weight rests on each wheel; the largest drawbar force a wheel can transmit
before slipping is that normal load times the surface static friction, and
the torque to reach it is the force times the wheel radius.  Each gearbox
drives the two wheels of one side, so it must supply twice the per-wheel
torque; it has the motor's rated torque times the reduction available.
Top speed follows from the motor free speed through the same reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .world import InvalidSpec, RobotParams, SurfaceParams

GRAVITY_M_S2 = 9.8

# Motor datasheets quote rated torque in kgf*cm; conversion uses standard
# gravity (exactly 9.80665) regardless of the sim's local gravity value.
KGF_CM_TO_NM = 0.0980665


@dataclass(frozen=True)
class SizingInputs:
    mass_kg: float
    wheel_radius_m: float
    gear_ratio: float
    motor_rated_torque_nm: float
    motor_free_speed_rpm: float
    static_friction: float
    gravity_m_s2: float = GRAVITY_M_S2

    def __post_init__(self) -> None:
        for name in (
            "mass_kg",
            "wheel_radius_m",
            "gear_ratio",
            "motor_rated_torque_nm",
            "motor_free_speed_rpm",
            "static_friction",
            "gravity_m_s2",
        ):
            if getattr(self, name) <= 0.0:
                raise InvalidSpec(f"{name} must be positive")

    @classmethod
    def from_robot(
        cls, params: RobotParams, surface: SurfaceParams, gravity: float = GRAVITY_M_S2
    ) -> "SizingInputs":
        return cls(
            mass_kg=params.mass_kg,
            wheel_radius_m=params.wheel_radius_m,
            gear_ratio=params.gear_ratio,
            motor_rated_torque_nm=params.motor_rated_torque_nm,
            motor_free_speed_rpm=params.motor_free_speed_rpm,
            static_friction=surface.static_friction,
            gravity_m_s2=gravity,
        )


@dataclass(frozen=True)
class SizingReport:
    inputs: SizingInputs
    wheel_normal_force_n: float  # weight carried by one wheel
    traction_force_per_wheel_n: float  # slip-limited drawbar force
    wheel_torque_nm: float  # torque to reach the traction limit
    required_gearbox_torque_nm: float  # two wheels per gearbox
    available_gearbox_torque_nm: float  # motor rated torque * reduction
    torque_margin_nm: float
    feasible: bool
    wheel_speed_limit_rad_s: float
    top_speed_m_s: float
    top_speed_km_h: float

    def as_dict(self) -> dict:
        d = {
            "mass_kg": self.inputs.mass_kg,
            "wheel_radius_m": self.inputs.wheel_radius_m,
            "gear_ratio": self.inputs.gear_ratio,
            "motor_rated_torque_nm": self.inputs.motor_rated_torque_nm,
            "motor_free_speed_rpm": self.inputs.motor_free_speed_rpm,
            "static_friction": self.inputs.static_friction,
            "gravity_m_s2": self.inputs.gravity_m_s2,
            "wheel_normal_force_n": self.wheel_normal_force_n,
            "traction_force_per_wheel_n": self.traction_force_per_wheel_n,
            "wheel_torque_nm": self.wheel_torque_nm,
            "required_gearbox_torque_nm": self.required_gearbox_torque_nm,
            "available_gearbox_torque_nm": self.available_gearbox_torque_nm,
            "torque_margin_nm": self.torque_margin_nm,
            "feasible": self.feasible,
            "wheel_speed_limit_rad_s": self.wheel_speed_limit_rad_s,
            "top_speed_m_s": self.top_speed_m_s,
            "top_speed_km_h": self.top_speed_km_h,
        }
        return d


def size_drivetrain(inputs: SizingInputs) -> SizingReport:
    """Evaluate the full sizing chain for one motor/gearbox side."""
    normal = inputs.mass_kg * inputs.gravity_m_s2 / 4.0
    traction = normal * inputs.static_friction
    wheel_torque = traction * inputs.wheel_radius_m
    required = 2.0 * wheel_torque
    available = inputs.gear_ratio * inputs.motor_rated_torque_nm
    wheel_limit = wheel_speed_limit(
        inputs.motor_free_speed_rpm, inputs.gear_ratio
    )
    top_speed = wheel_limit * inputs.wheel_radius_m
    return SizingReport(
        inputs=inputs,
        wheel_normal_force_n=normal,
        traction_force_per_wheel_n=traction,
        wheel_torque_nm=wheel_torque,
        required_gearbox_torque_nm=required,
        available_gearbox_torque_nm=available,
        torque_margin_nm=available - required,
        feasible=available >= required,
        wheel_speed_limit_rad_s=wheel_limit,
        top_speed_m_s=top_speed,
        top_speed_km_h=top_speed * 3.6,
    )


def wheel_speed_limit(motor_free_speed_rpm: float, gear_ratio: float) -> float:
    """Maximum wheel shaft speed [rad/s] at the motor free speed."""
    if motor_free_speed_rpm <= 0.0 or gear_ratio <= 0.0:
        raise InvalidSpec("free speed and gear ratio must be positive")
    return 2.0 * math.pi * motor_free_speed_rpm / (60.0 * gear_ratio)


@dataclass(frozen=True)
class TwistLimits:
    """Actuator-feasible body twist envelope (each axis independently)."""

    v_max_m_s: float
    omega_max_rad_s: float


def twist_limits(params: RobotParams) -> TwistLimits:
    """Body speed limits implied by the wheel speed limit.

    v_max is straight-line top speed; omega_max is spin-in-place rate where
    both sides run at the wheel limit across the slip-widened track.
    """
    wheel_limit = wheel_speed_limit(params.motor_free_speed_rpm, params.gear_ratio)
    v_max = wheel_limit * params.wheel_radius_m
    effective_track = params.slip_widening_factor * params.track_width_m
    return TwistLimits(
        v_max_m_s=v_max, omega_max_rad_s=2.0 * v_max / effective_track
    )
