"""Sensor models: quadrant solar heading unit, planar lidar, downward-pitched
thermal camera, hall odometry, and the cabin humidity/temperature probe.

Synthesis and inversion live side by side on purpose.  Each synthesized
reading is built so the matching estimator recovers the underlying quantity
exactly in the noise-free case; tests pin those round trips.

All random draws come from generators the caller derives per (seed, stream,
frame), so rendering one sensor never perturbs another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .simcore import Pose, Twist, integrate_pose, normalize_angle
from .world import HeightClass, RobotParams, SunState, TunnelScenario


class InsufficientLight(ValueError):
    """Total quadrant voltage too low to trust a solar estimate."""


# --- quadrant solar heading unit ---------------------------------------------


@dataclass(frozen=True)
class SolarConfig:
    """Four-quadrant photodiode behind a pinhole aperture.

    The light spot displaces proportionally to tan(incidence angle); the
    normalized voltage imbalance F equals that displacement over the gain,
    so incidence recovers as alpha = atan(gain * F).  The spot stays on the
    cell only while |F_x| + |F_y| <= 1.
    """

    gain: float = 1.0  # optical lever arm (spot shift per tan(alpha))
    full_sun_volts: float = 2.0  # quadrant sum in full direct sun
    min_valid_sum_fraction: float = 0.05  # of full_sun_volts

    @property
    def min_valid_sum_volts(self) -> float:
        return self.min_valid_sum_fraction * self.full_sun_volts


@dataclass(frozen=True)
class SolarAngles:
    """Sun incidence decomposed on the sensor's two axes [rad]."""

    alpha_x: float
    alpha_y: float


@dataclass(frozen=True)
class SolarReading:
    """Raw quadrant voltages plus the sensor's own validity judgement."""

    v1: float
    v2: float
    v3: float
    v4: float
    valid: bool

    @property
    def total(self) -> float:
        return self.v1 + self.v2 + self.v3 + self.v4


def solar_project(yaw: float, sun: SunState) -> SolarAngles:
    """Incidence angles seen by a level sensor on a robot at this yaw.

    The sun bearing in the body frame is azimuth - yaw; the incidence
    components scale with co-elevation: tan(alpha_x) = cot(el)*cos(bearing)
    and tan(alpha_y) = cot(el)*sin(bearing).  atan2 keeps the horizon case
    (elevation 0) finite at +/-90 deg.
    """
    bearing = normalize_angle(sun.azimuth_rad - yaw)
    tan_el = math.tan(sun.elevation_rad)
    return SolarAngles(
        alpha_x=math.atan2(math.cos(bearing), tan_el),
        alpha_y=math.atan2(math.sin(bearing), tan_el),
    )


def solar_synthesize(
    angles: SolarAngles, sun: SunState, cfg: SolarConfig
) -> SolarReading:
    """Quadrant voltages for a given incidence, attenuated by cloud cover.

    Uses the symmetric quarter split, which keeps both normalized
    imbalances exact: F_x = (v1+v2-v3-v4)/sum, F_y = (v2+v3-v1-v4)/sum.
    Outside |F_x|+|F_y| <= 1 the spot leaves the cell: voltages clamp at
    zero and the reading is flagged invalid, as it is when cloud cover
    drops the total below the validity threshold.
    """
    fx = math.tan(angles.alpha_x) / cfg.gain
    fy = math.tan(angles.alpha_y) / cfg.gain
    s = cfg.full_sun_volts * sun.cloud_factor
    quarters = (
        s * (1.0 + fx - fy) / 4.0,
        s * (1.0 + fx + fy) / 4.0,
        s * (1.0 - fx + fy) / 4.0,
        s * (1.0 - fx - fy) / 4.0,
    )
    v1, v2, v3, v4 = (max(0.0, q) for q in quarters)
    in_fov = abs(fx) + abs(fy) <= 1.0
    valid = in_fov and (v1 + v2 + v3 + v4) > cfg.min_valid_sum_volts
    return SolarReading(v1=v1, v2=v2, v3=v3, v4=v4, valid=valid)


def solar_estimate(reading: SolarReading, cfg: SolarConfig) -> SolarAngles:
    """Invert a quadrant reading back to incidence angles.

    The imbalances are voltage ratios, so any uniform attenuation (cloud)
    cancels exactly.  Raises InsufficientLight below the validity
    threshold; a reading flagged invalid for other reasons (spot off the
    cell) is a caller error.
    """
    if min(reading.v1, reading.v2, reading.v3, reading.v4) < 0.0:
        raise ValueError("quadrant voltages must be nonnegative")
    total = reading.total
    if total <= cfg.min_valid_sum_volts:
        raise InsufficientLight(f"quadrant sum {total:.4f} V below threshold")
    if not reading.valid:
        raise ValueError("reading flagged invalid (sun outside sensor FOV)")
    fx = (reading.v1 + reading.v2 - reading.v3 - reading.v4) / total
    fy = (reading.v2 + reading.v3 - reading.v1 - reading.v4) / total
    return SolarAngles(
        alpha_x=math.atan(cfg.gain * fx), alpha_y=math.atan(cfg.gain * fy)
    )


# --- planar lidar -------------------------------------------------------------


@dataclass(frozen=True)
class LidarConfig:
    beam_count: int = 360
    angle_min_rad: float = -math.pi  # first beam, body frame
    angle_max_rad: float = math.pi
    max_range_m: float = 8.0
    min_range_m: float = 0.05
    range_noise_std_m: float = 0.01
    canopy_hit_prob: float = 0.3  # chance a beam stops in overhanging leaves


@dataclass(frozen=True, eq=False)
class LidarScan:
    angle_min_rad: float
    angle_max_rad: float
    ranges: np.ndarray  # (n_beams,), max_range_m where nothing was hit
    max_range_m: float

    @property
    def n_beams(self) -> int:
        return len(self.ranges)

    def beam_angles(self) -> np.ndarray:
        """Body-frame bearing of every beam."""
        step = (self.angle_max_rad - self.angle_min_rad) / self.n_beams
        return self.angle_min_rad + step * np.arange(self.n_beams)


_lidar_rel_cache: dict[LidarConfig, np.ndarray] = {}


def _relative_angles(cfg: LidarConfig) -> np.ndarray:
    rel = _lidar_rel_cache.get(cfg)
    if rel is None:
        step = (cfg.angle_max_rad - cfg.angle_min_rad) / cfg.beam_count
        rel = cfg.angle_min_rad + step * np.arange(cfg.beam_count)
        rel.setflags(write=False)
        _lidar_rel_cache[cfg] = rel
    return rel


def lidar_scan(
    pose: Pose,
    scenario: TunnelScenario,
    cfg: LidarConfig,
    rng: np.random.Generator,
) -> LidarScan:
    """Cast one full scan against stem circles and (H3) canopy overhang.

    Under a closed canopy each beam crossing the overhang band has an
    independent chance of stopping in the leaves before reaching a stem.
    Gaussian range noise applies to returns only; no-hit beams stay pinned
    at max_range_m, and returns are clipped to (min_range_m, max_range_m].
    """
    rel = _relative_angles(cfg)
    ang = pose.theta + rel
    dir_x = np.cos(ang)
    dir_y = np.sin(ang)
    ranges = kernels.raycast_circles(
        dir_x, dir_y, pose.x, pose.y, scenario.all_stems(), cfg.max_range_m
    )
    if scenario.canopy_overhang_m > 0.0:
        half = scenario.row_spacing_m / 2.0
        inner = scenario.wall_half_width_m
        boxes = (
            (0.0, scenario.length_m, inner, half),
            (0.0, scenario.length_m, -half, -inner),
        )
        stop = rng.uniform(size=cfg.beam_count) < cfg.canopy_hit_prob
        for box in boxes:
            entry = _ray_box_entry(pose.x, pose.y, dir_x, dir_y, box)
            hit = stop & np.isfinite(entry) & (entry < ranges)
            ranges = np.where(hit, entry, ranges)
    noise = rng.normal(0.0, cfg.range_noise_std_m, cfg.beam_count)
    returned = ranges < cfg.max_range_m
    noisy = np.clip(ranges + noise, cfg.min_range_m, cfg.max_range_m)
    ranges = np.where(returned, noisy, cfg.max_range_m)
    return LidarScan(
        angle_min_rad=cfg.angle_min_rad,
        angle_max_rad=cfg.angle_max_rad,
        ranges=ranges,
        max_range_m=cfg.max_range_m,
    )


def _ray_box_entry(
    px: float, py: float, dir_x: np.ndarray, dir_y: np.ndarray, box
) -> np.ndarray:
    """Entry distance of each ray into an axis-aligned box (inf = miss).

    Relies on IEEE division for axis-parallel rays; a ray starting inside
    the box reports no entry (the lidar sits below the canopy band, never
    inside it).
    """
    x0, x1, y0, y1 = box
    with np.errstate(divide="ignore", invalid="ignore"):
        tx_a = (x0 - px) / dir_x
        tx_b = (x1 - px) / dir_x
        ty_a = (y0 - py) / dir_y
        ty_b = (y1 - py) / dir_y
    t_enter = np.maximum(np.minimum(tx_a, tx_b), np.minimum(ty_a, ty_b))
    t_exit = np.minimum(np.maximum(tx_a, tx_b), np.maximum(ty_a, ty_b))
    ok = (t_enter <= t_exit) & (t_enter > 0.0)
    return np.where(ok, t_enter, np.inf)


# --- thermal camera -----------------------------------------------------------


@dataclass(frozen=True)
class ThermalConfig:
    """Downward-pitched thermal imager looking along the corridor.

    Pinhole model with square pixels; 0 pitch is level, negative looks
    down.  Scene temperatures: sun-warmed path against cooler leaf walls,
    with a shaded strip (kerb) at the path border.  Under a closed canopy
    (H3) the contrast inverts: shaded soil reads cooler than the leaf mass
    and the kerb disappears.
    """

    width: int = 160
    height: int = 120
    hfov_rad: float = math.radians(55.0)
    cam_height_m: float = 0.5
    cam_pitch_rad: float = math.radians(-10.0)
    cam_forward_m: float = 0.3  # lens ahead of the body center
    path_temp_c: float = 45.0
    plant_temp_c: float = 30.0
    kerb_temp_c: float = 25.0
    kerb_width_m: float = 0.15
    shaded_path_temp_c: float = 26.0  # ground under a closed canopy
    ambient_temp_c: float = 25.0
    noise_std_c: float = 0.3


@dataclass(frozen=True, eq=False)
class ThermalImage:
    width: int
    height: int
    temps_c: np.ndarray  # (height, width) float64


@dataclass(frozen=True, eq=False)
class ThermalGeometry:
    """Per-pixel flat-ground intersections for one camera config."""

    xb_row: np.ndarray  # (H,) forward ground coordinate per row, body frame
    yb: np.ndarray  # (H, W) lateral ground coordinate, body frame
    row_valid: np.ndarray  # (H,) bool, row looks below the horizon
    meters_per_col: np.ndarray  # (H,) lateral meters spanned by one column


_thermal_geom_cache: dict[ThermalConfig, ThermalGeometry] = {}


def thermal_geometry(cfg: ThermalConfig) -> ThermalGeometry:
    """Ground-plane projection grids, cached per config.

    Ray directions are left unnormalized, which makes the lateral ground
    coordinate exactly linear in the column index at fixed row; the
    centerline fit downstream leans on that.
    """
    geom = _thermal_geom_cache.get(cfg)
    if geom is not None:
        return geom
    fx = (cfg.width / 2.0) / math.tan(cfg.hfov_rad / 2.0)
    cx = (cfg.width - 1) / 2.0
    cy = (cfg.height - 1) / 2.0
    a = (np.arange(cfg.width) - cx) / fx  # rightward tangent per column
    b = (np.arange(cfg.height) - cy) / fx  # downward tangent per row
    sin_p = math.sin(cfg.cam_pitch_rad)
    cos_p = math.cos(cfg.cam_pitch_rad)
    dz = sin_p - cos_p * b  # vertical ray component per row
    row_valid = dz < -1e-9
    t = np.where(row_valid, -cfg.cam_height_m / np.where(row_valid, dz, -1.0), 0.0)
    xb_row = cfg.cam_forward_m + t * (cos_p + sin_p * b)
    yb = t[:, None] * (-a)[None, :]
    meters_per_col = t / fx
    for arr in (xb_row, yb, row_valid, t, meters_per_col):
        arr.setflags(write=False)
    geom = ThermalGeometry(
        xb_row=xb_row, yb=yb, row_valid=row_valid, meters_per_col=meters_per_col
    )
    _thermal_geom_cache[cfg] = geom
    return geom


def thermal_render(
    pose: Pose,
    scenario: TunnelScenario,
    sun: SunState,
    cfg: ThermalConfig,
    rng: np.random.Generator,
) -> ThermalImage:
    """Render the corridor temperature field seen from this pose.

    Cloud cover squeezes every temperature toward ambient before pixel
    noise: T -> ambient + cloud_factor * (T - ambient).
    """
    geom = thermal_geometry(cfg)
    inverted = scenario.height_class is HeightClass.H3
    t_ground = cfg.shaded_path_temp_c if inverted else cfg.path_temp_c
    y_wall = scenario.wall_half_width_m
    kerb_inner = y_wall - cfg.kerb_width_m
    sin_t = math.sin(pose.theta)
    cos_t = math.cos(pose.theta)
    lat_row = pose.y + sin_t * geom.xb_row
    temps = kernels.thermal_field(
        lat_row,
        cos_t,
        geom.yb,
        geom.row_valid,
        y_wall,
        kerb_inner,
        t_ground,
        cfg.kerb_temp_c,
        cfg.plant_temp_c,
        not inverted,
    )
    temps = cfg.ambient_temp_c + sun.cloud_factor * (temps - cfg.ambient_temp_c)
    if cfg.noise_std_c > 0.0:
        temps = temps + rng.normal(0.0, cfg.noise_std_c, temps.shape)
    return ThermalImage(width=cfg.width, height=cfg.height, temps_c=temps)


def thermal_ground_point(
    cfg: ThermalConfig, col: float, row: int
) -> tuple[float, float] | None:
    """Body-frame ground point under a (possibly fractional) pixel column."""
    geom = thermal_geometry(cfg)
    if not geom.row_valid[row]:
        return None
    x = float(geom.xb_row[row])
    y = float(-(col - (cfg.width - 1) / 2.0) * geom.meters_per_col[row])
    return (x, y)


# --- hall odometry ------------------------------------------------------------


@dataclass(frozen=True)
class OdometryEstimate:
    pose: Pose
    v: float
    omega: float


def odometry_update(
    est: OdometryEstimate,
    ticks_left: int,
    ticks_right: int,
    params: RobotParams,
    dt: float,
) -> OdometryEstimate:
    """Dead-reckon one step from hall tick deltas.

    Tick quantum: one motor revolution is ticks_per_motor_rev counts, so a
    tick is 2*pi*r / (ticks * ratio) meters of wheel travel (~1.05 mm at
    the default build).  Equal tick counts leave the heading exactly
    unchanged; straight runs accumulate no float wobble.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    meters_per_tick = (
        math.tau
        * params.wheel_radius_m
        / (params.ticks_per_motor_rev * params.gear_ratio)
    )
    d_left = ticks_left * meters_per_tick
    d_right = ticks_right * meters_per_tick
    v = (d_left + d_right) / (2.0 * dt)
    omega = (d_right - d_left) / (
        params.slip_widening_factor * params.track_width_m * dt
    )
    twist = Twist(v=v, omega=omega)
    return OdometryEstimate(pose=integrate_pose(est.pose, twist, dt), v=v, omega=omega)


# --- cabin humidity/temperature probe ----------------------------------------


@dataclass(frozen=True)
class HtConfig:
    temp_noise_std_c: float = 0.2
    rh_noise_std: float = 1.0


@dataclass(frozen=True)
class HTReading:
    temperature_c: float
    humidity_pct: float  # always within [0, 100]


def ht_sample(
    env: tuple[float, float], cfg: HtConfig, rng: np.random.Generator
) -> HTReading:
    """Noisy probe sample; humidity clipped to the physical 0..100 range."""
    temp_c, humidity_pct = env
    t = temp_c + rng.normal(0.0, cfg.temp_noise_std_c)
    h = float(np.clip(humidity_pct + rng.normal(0.0, cfg.rh_noise_std), 0.0, 100.0))
    return HTReading(temperature_c=t, humidity_pct=h)
