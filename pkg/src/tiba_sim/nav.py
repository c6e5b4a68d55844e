"""Corridor navigation: thermal centerline, lidar corridor fit, steering laws.

Estimate conventions used everywhere here:
  lateral_offset  + = robot is LEFT of the corridor center [m]
  heading_error   + = robot heading points LEFT of the corridor axis [rad]
so the steering law omega = -k_y*offset - k_theta*heading_error turns right
exactly when the robot drifted or yawed left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .drivetrain import TwistLimits
from .sensors import (
    LidarScan,
    SolarAngles,
    ThermalConfig,
    ThermalImage,
    thermal_geometry,
    thermal_ground_point,
)
from .simcore import Pose, Twist, normalize_angle
from .world import SunState


class NoPath(ValueError):
    """Thermal image has too few usable path rows."""


class NoCorridor(ValueError):
    """Lidar scan has too few corridor points on either side."""


class IllConditioned(ValueError):
    """Sun too close to zenith for a usable heading."""


@dataclass(frozen=True)
class CorridorEstimate:
    lateral_offset_m: float
    heading_error_rad: float
    confidence: float  # in [0, 1]


# --- thermal centerline -------------------------------------------------------


@dataclass(frozen=True)
class CenterlineConfig:
    """Mask thresholding plus the camera geometry for ground projection."""

    camera: ThermalConfig = field(default_factory=ThermalConfig)
    min_rows: int = 8  # usable rows required for an estimate
    min_width_px: int = 4
    width_tolerance: float = 0.5  # fractional deviation from median width
    band_c: tuple[float, float] | None = None  # explicit (lo, hi) mask band


def thermal_centerline(img: ThermalImage, cfg: CenterlineConfig) -> CorridorEstimate:
    """Recover the path centerline from one thermal frame.

    The path mask is either the configured temperature band or an automatic
    split between the bottom-center block (path) and the mid-height side
    blocks (plant wall); the automatic split flips itself for
    inverted-contrast scenes where the ground reads colder than the leaves.

    Per row, the leftmost/rightmost mask columns form the margins; rows
    whose margins touch the image border (true edge out of view) or whose
    width strays more than width_tolerance from the median are dropped.  A
    least-squares line is fitted to each margin over the surviving rows and
    the centerline is the mean of the two fits.  Offset is the ground
    projection of the centerline at the nearest surviving row; heading
    comes from the projected centerline direction.
    """
    temps = img.temps_c
    height, width = temps.shape
    geom = thermal_geometry(cfg.camera)
    if cfg.band_c is not None:
        lo, hi = cfg.band_c
        mask = (temps >= lo) & (temps <= hi)
    else:
        center = temps[int(0.8 * height) :, int(0.42 * width) : int(0.58 * width)]
        side_rows = slice(int(0.38 * height), int(0.55 * height))
        sides = np.concatenate(
            (
                temps[side_rows, : int(0.18 * width)].ravel(),
                temps[side_rows, int(0.82 * width) :].ravel(),
            )
        )
        t_center = float(center.mean())
        t_side = float(sides.mean())
        split = 0.5 * (t_center + t_side)
        mask = (temps > split) if t_center > t_side else (temps < split)
    mask = mask & geom.row_valid[:, None]

    has_any = mask.any(axis=1)
    left = mask.argmax(axis=1)
    right = width - 1 - mask[:, ::-1].argmax(axis=1)
    both = (
        has_any
        & (left > 0)
        & (right < width - 1)
        & ((right - left) >= cfg.min_width_px)
    )
    candidates = np.nonzero(both)[0]
    found = len(candidates)
    if found < cfg.min_rows:
        raise NoPath(f"only {found} rows with both margins")

    widths = (right - left)[candidates]
    median_width = float(np.median(widths))
    keep = np.abs(widths - median_width) <= cfg.width_tolerance * median_width
    rows = candidates[keep]
    if len(rows) < cfg.min_rows:
        raise NoPath(f"only {len(rows)} rows after width filtering")

    rows_f = rows.astype(float)
    slope_l, icept_l = np.polyfit(rows_f, left[rows].astype(float), 1)
    slope_r, icept_r = np.polyfit(rows_f, right[rows].astype(float), 1)
    slope = 0.5 * (slope_l + slope_r)
    intercept = 0.5 * (icept_l + icept_r)

    row_near = int(rows.max())
    row_far = int(rows.min())
    near = thermal_ground_point(cfg.camera, intercept + slope * row_near, row_near)
    far = thermal_ground_point(cfg.camera, intercept + slope * row_far, row_far)
    if near is None or far is None or (far[0] - near[0]) <= 1e-9:
        raise NoPath("degenerate centerline geometry")
    direction = math.atan2(far[1] - near[1], far[0] - near[0])
    ground_rows = int(np.count_nonzero(geom.row_valid))
    return CorridorEstimate(
        lateral_offset_m=-near[1],
        heading_error_rad=-direction,
        confidence=min(1.0, found / max(1, ground_rows)),
    )


# --- lidar corridor -----------------------------------------------------------


@dataclass(frozen=True)
class CorridorConfig:
    min_points: int = 6  # per-side minimum for a line fit
    max_fit_range_m: float = 6.0  # ignore returns farther than this
    nominal_row_spacing_m: float = 1.5  # used by the one-sided fallback
    full_confidence_points: int = 24  # total inliers for confidence 1.0


def _fit_row_line(points: np.ndarray, min_points: int):
    """Total-least-squares line through corridor points.

    Returns (direction angle in (-pi/2, pi/2], y at x=0, count) or None if
    underpopulated or too close to perpendicular to the corridor axis.
    """
    n = len(points)
    if n < min_points:
        return None
    cx, cy = points.mean(axis=0)
    dx = points[:, 0] - cx
    dy = points[:, 1] - cy
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    sxy = float(np.dot(dx, dy))
    phi = 0.5 * math.atan2(2.0 * sxy, sxx - syy)
    ux = math.cos(phi)
    if abs(ux) < 0.2:
        return None
    y0 = cy - cx * (math.sin(phi) / ux)
    return (phi, y0, n)


def lidar_corridor(scan: LidarScan, cfg: CorridorConfig) -> CorridorEstimate:
    """Fit the plant-row corridor from one scan.

    Forward-hemisphere returns are split by lateral sign and each side gets
    a total-least-squares line.  Corridor direction is the axial circular
    mean of the two; offset is the y-intercept of the midline.  With one
    populated side the midline is that line shifted by half the nominal row
    spacing, at reduced confidence.
    """
    angles = scan.beam_angles()
    r = scan.ranges
    sel = (
        (r < scan.max_range_m * 0.999)
        & (r <= cfg.max_fit_range_m)
        & (np.abs(angles) < math.pi / 2)
    )
    x = r[sel] * np.cos(angles[sel])
    y = r[sel] * np.sin(angles[sel])
    left_pts = np.column_stack((x[y > 0.0], y[y > 0.0]))
    right_pts = np.column_stack((x[y < 0.0], y[y < 0.0]))
    left = _fit_row_line(left_pts, cfg.min_points)
    right = _fit_row_line(right_pts, cfg.min_points)

    if left is not None and right is not None:
        phi_l, y0_l, n_l = left
        phi_r, y0_r, n_r = right
        # Axial mean: lines have no front/back, so average doubled angles.
        phi = 0.5 * math.atan2(
            math.sin(2 * phi_l) + math.sin(2 * phi_r),
            math.cos(2 * phi_l) + math.cos(2 * phi_r),
        )
        midline_y = 0.5 * (y0_l + y0_r)
        confidence = min(1.0, (n_l + n_r) / cfg.full_confidence_points)
    elif left is not None:
        phi, y0, n = left
        midline_y = y0 - cfg.nominal_row_spacing_m / 2.0
        confidence = min(0.5, n / cfg.full_confidence_points)
    elif right is not None:
        phi, y0, n = right
        midline_y = y0 + cfg.nominal_row_spacing_m / 2.0
        confidence = min(0.5, n / cfg.full_confidence_points)
    else:
        raise NoCorridor(
            f"{len(left_pts)} left / {len(right_pts)} right points, "
            f"need {cfg.min_points} on a side"
        )
    return CorridorEstimate(
        lateral_offset_m=-midline_y,
        heading_error_rad=-phi,
        confidence=confidence,
    )


# --- steering laws ------------------------------------------------------------


@dataclass(frozen=True)
class SteerGains:
    k_y: float = 1.5  # rad/s per meter of lateral offset
    k_theta: float = 2.0  # rad/s per rad of heading error


def corridor_steer(
    est: CorridorEstimate, gains: SteerGains, v_ref: float, limits: TwistLimits
) -> Twist:
    """Proportional steering toward the corridor center.

    Forward speed backs off with turn demand and with estimate confidence;
    it never goes negative, and omega is clamped to the actuator envelope.
    """
    omega = -gains.k_y * est.lateral_offset_m - gains.k_theta * est.heading_error_rad
    omega = min(max(omega, -limits.omega_max_rad_s), limits.omega_max_rad_s)
    v = v_ref * (1.0 - abs(omega) / limits.omega_max_rad_s) * est.confidence
    v = min(max(v, 0.0), limits.v_max_m_s)
    return Twist(v=v, omega=omega)


DEFAULT_MAX_SUN_ELEVATION_RAD = math.radians(85.0)


def sun_heading(
    angles: SolarAngles,
    sun: SunState,
    elevation_max_rad: float = DEFAULT_MAX_SUN_ELEVATION_RAD,
) -> float:
    """World yaw from a solar incidence measurement.

    The incidence pair encodes the sun's body-frame bearing as
    atan2(tan(alpha_y), tan(alpha_x)); subtracting it from the known world
    azimuth gives yaw.  Near zenith both tangents collapse toward zero and
    the bearing is meaningless, hence the elevation guard.
    """
    if sun.elevation_rad >= elevation_max_rad:
        raise IllConditioned(
            f"sun elevation {sun.elevation_rad:.3f} rad too close to zenith"
        )
    body_bearing = math.atan2(math.tan(angles.alpha_y), math.tan(angles.alpha_x))
    return normalize_angle(sun.azimuth_rad - body_bearing)


@dataclass(frozen=True)
class PursuitConfig:
    lookahead_m: float = 2.0
    arrival_radius_m: float = 0.3
    v_ref_m_s: float = 0.8


def waypoint_steer(
    pose: Pose,
    path: list[tuple[float, float]],
    cfg: PursuitConfig,
    limits: TwistLimits,
) -> Twist | None:
    """Pure pursuit along a waypoint list; None means arrived.

    The target is the first point at least one lookahead away, searching
    forward from the nearest path point so points already passed are never
    re-selected.  Curvature = 2 * y_target / L^2 in the body frame.
    """
    if not path:
        raise ValueError("path must not be empty")
    final_x, final_y = path[-1]
    if math.hypot(final_x - pose.x, final_y - pose.y) <= cfg.arrival_radius_m:
        return None
    dists = [math.hypot(px - pose.x, py - pose.y) for px, py in path]
    start = dists.index(min(dists))
    target = path[-1]
    for i in range(start, len(path)):
        if dists[i] >= cfg.lookahead_m:
            target = path[i]
            break
    dx = target[0] - pose.x
    dy = target[1] - pose.y
    sin_t = math.sin(pose.theta)
    cos_t = math.cos(pose.theta)
    y_body = -sin_t * dx + cos_t * dy
    curvature = 2.0 * y_body / cfg.lookahead_m**2
    omega = cfg.v_ref_m_s * curvature
    omega = min(max(omega, -limits.omega_max_rad_s), limits.omega_max_rad_s)
    v = min(cfg.v_ref_m_s, limits.v_max_m_s)
    return Twist(v=v, omega=omega)
