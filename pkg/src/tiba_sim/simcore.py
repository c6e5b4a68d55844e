"""Skid-steer kinematics, exact pose integration, and wheel drive dynamics.

Body frame: x forward, y left, yaw CCW.  Wheel speeds are wheel-shaft
rad/s; left/right refer to the robot's own left/right.  Skid steering
grinds the wheels sideways in a turn, which behaves like a wider track:
the effective track is slip_widening_factor * track_width_m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .drivetrain import wheel_speed_limit
from .world import RobotParams, SurfaceParams

# Below this |omega| a trajectory is integrated as a straight segment.
OMEGA_EPS = 1e-9
# First-order wheel speed response constants [s]: tracking vs emergency brake
# (shorted-winding braking bites much harder than the speed loop).
DEFAULT_MOTOR_TAU_S = 0.15
BRAKE_TAU_S = 0.02
# Stiction: a wheel commanded to zero and turning slower than this stops dead.
STOP_SNAP_RAD_S = 0.1


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    theta: float  # CCW from +x, in (-pi, pi]


@dataclass(frozen=True)
class Twist:
    v: float  # forward speed [m/s]
    omega: float  # yaw rate [rad/s]


@dataclass(frozen=True)
class WheelSpeeds:
    left: float  # wheel shaft [rad/s]
    right: float


def normalize_angle(angle: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.remainder(angle, math.tau)
    if wrapped <= -math.pi:
        wrapped += math.tau
    return wrapped


def twist_to_wheel_speeds(twist: Twist, params: RobotParams) -> WheelSpeeds:
    """Invert the skid-steer model; saturate preserving the turn ratio.

    If either wheel would exceed the drivetrain speed limit, both are scaled
    by the same factor so the commanded arc curvature is preserved.
    """
    half_track = 0.5 * params.slip_widening_factor * params.track_width_m
    left = (twist.v - twist.omega * half_track) / params.wheel_radius_m
    right = (twist.v + twist.omega * half_track) / params.wheel_radius_m
    limit = wheel_speed_limit(params.motor_free_speed_rpm, params.gear_ratio)
    peak = max(abs(left), abs(right))
    if peak > limit:
        scale = limit / peak
        left *= scale
        right *= scale
    return WheelSpeeds(left=left, right=right)


def wheel_speeds_to_twist(wheels: WheelSpeeds, params: RobotParams) -> Twist:
    """Forward skid-steer model from wheel shaft speeds."""
    v_left = wheels.left * params.wheel_radius_m
    v_right = wheels.right * params.wheel_radius_m
    effective_track = params.slip_widening_factor * params.track_width_m
    return Twist(
        v=0.5 * (v_left + v_right), omega=(v_right - v_left) / effective_track
    )


def integrate_pose(pose: Pose, twist: Twist, dt: float) -> Pose:
    """Advance along the exact constant-twist arc for dt seconds."""
    if dt < 0.0:
        raise ValueError("dt must be >= 0")
    if abs(twist.omega) < OMEGA_EPS:
        # Straight segment; heading left bitwise untouched so it cannot drift.
        return Pose(
            x=pose.x + twist.v * dt * math.cos(pose.theta),
            y=pose.y + twist.v * dt * math.sin(pose.theta),
            theta=pose.theta,
        )
    radius = twist.v / twist.omega
    theta_new = pose.theta + twist.omega * dt
    x = pose.x + radius * (math.sin(theta_new) - math.sin(pose.theta))
    y = pose.y + radius * (math.cos(pose.theta) - math.cos(theta_new))
    return Pose(x=x, y=y, theta=normalize_angle(theta_new))


@dataclass(frozen=True)
class MotorSideState:
    """One gearbox side: tracked speed plus the hall tick accumulator."""

    speed_rad_s: float = 0.0  # wheel shaft speed
    hall_ticks: int = 0  # emitted integer tick count (signed)
    spin_ticks: float = 0.0  # continuous tick equivalent of shaft angle


def max_wheel_accel(
    surface: SurfaceParams,
    params: RobotParams,
    braking: bool,
    gravity: float = 9.8,
) -> float:
    """Wheel-shaft acceleration bound [rad/s^2] on a surface.

    Driving: gearbox torque minus the side's rolling drag
    (c_rr * M*g/4 * r per wheel, two wheels) accelerates half the robot
    mass.  Braking toward zero the drag helps instead of fighting.
    """
    drive_torque = params.gear_ratio * params.motor_rated_torque_nm
    drag_torque = (
        2.0
        * surface.rolling_resistance
        * (params.mass_kg * gravity / 4.0)
        * params.wheel_radius_m
    )
    if braking:
        net = drive_torque + drag_torque
    else:
        net = max(0.0, drive_torque - drag_torque)
    side_inertia = (params.mass_kg / 2.0) * params.wheel_radius_m**2
    return net / side_inertia


def _step_side(
    state: MotorSideState,
    cmd: float,
    surface: SurfaceParams,
    params: RobotParams,
    dt: float,
    tau: float,
    limit: float,
    ticks_per_wheel_rad: float,
    gravity: float,
) -> tuple[MotorSideState, int]:
    # First-order tracking toward the command, then the torque slew cap.
    desired = (cmd - state.speed_rad_s) * (1.0 - math.exp(-dt / tau))
    braking = state.speed_rad_s != 0.0 and (
        desired * state.speed_rad_s < 0.0
    )
    cap = max_wheel_accel(surface, params, braking=braking, gravity=gravity) * dt
    delta = min(max(desired, -cap), cap)
    speed = min(max(state.speed_rad_s + delta, -limit), limit)
    if cmd == 0.0 and abs(speed) < STOP_SNAP_RAD_S:
        speed = 0.0
    # Hall counter: round the continuous total so the emitted integer never
    # strays more than half a tick from the true shaft angle.
    spin_ticks = state.spin_ticks + speed * dt * ticks_per_wheel_rad
    emitted = round(spin_ticks)
    tick_delta = emitted - state.hall_ticks
    return (
        MotorSideState(speed_rad_s=speed, hall_ticks=emitted, spin_ticks=spin_ticks),
        tick_delta,
    )


def step_motors(
    left: MotorSideState,
    right: MotorSideState,
    cmd: WheelSpeeds,
    surface: SurfaceParams,
    params: RobotParams,
    dt: float,
    time_constant: float = DEFAULT_MOTOR_TAU_S,
    gravity: float = 9.8,
) -> tuple[MotorSideState, MotorSideState, tuple[int, int]]:
    """Advance both drive sides by dt; returns new states and hall deltas."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    limit = wheel_speed_limit(params.motor_free_speed_rpm, params.gear_ratio)
    ticks_per_wheel_rad = (
        params.gear_ratio * params.ticks_per_motor_rev / math.tau
    )
    new_left, dl = _step_side(
        left, cmd.left, surface, params, dt, time_constant, limit,
        ticks_per_wheel_rad, gravity,
    )
    new_right, dr = _step_side(
        right, cmd.right, surface, params, dt, time_constant, limit,
        ticks_per_wheel_rad, gravity,
    )
    return new_left, new_right, (dl, dr)


def actual_twist(
    left: MotorSideState, right: MotorSideState, params: RobotParams
) -> Twist:
    return wheel_speeds_to_twist(
        WheelSpeeds(left=left.speed_rad_s, right=right.speed_rad_s), params
    )


def collide_stems(pose: Pose, params: RobotParams, stems: np.ndarray) -> np.ndarray:
    """Indices of stem circles overlapping the oriented body rectangle.

    stems is (n, 3) rows of x, y, radius.  The hull is body_length_m along
    the heading by body_width_m across, centered on the pose.
    """
    if len(stems) == 0:
        return np.empty(0, dtype=int)
    half_len = params.body_length_m / 2.0
    half_wid = params.body_width_m / 2.0
    reach = math.hypot(half_len, half_wid) + float(np.max(stems[:, 2]))
    near = np.nonzero(np.abs(stems[:, 0] - pose.x) <= reach)[0]
    if near.size == 0:
        return near
    dx = stems[near, 0] - pose.x
    dy = stems[near, 1] - pose.y
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    bx = c * dx + s * dy
    by = -s * dx + c * dy
    # Closest point on the rectangle to each circle center.
    qx = np.clip(bx, -half_len, half_len)
    qy = np.clip(by, -half_wid, half_wid)
    dist_sq = (bx - qx) ** 2 + (by - qy) ** 2
    return near[dist_sq <= stems[near, 2] ** 2]
