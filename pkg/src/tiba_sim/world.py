"""World model: field surfaces, plant-row tunnel geometry, sun state.

Coordinate system
-----------------
World frame: x along the tunnel axis (robot drives toward +x), y to the
left, origin on the corridor centerline at the tunnel entrance.  Angles are
CCW radians from +x.  All distances in meters.

A scenario is described by a flat :class:`ScenarioSpec` (what a scenario
file on disk maps to) and expanded by :func:`generate_tunnel` into an
immutable :class:`TunnelScenario` holding concrete stem positions and
crevice polygons.  Generation is a pure function of ScenarioSpec, so a
scenario never needs to be serialized: seed plus parameters reproduce it
bit for bit.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .seeding import substream, unit_float

# Salt for the surface-type hash so it cannot collide with stem jitter draws.
_SURFACE_SALT = 11
# Side length of the square cells surface type is assigned on [m].
SURFACE_CELL_M = 0.25
# How far outside the planted tunnel the drivable field extends [m].
_FIELD_MARGIN_M = 5.0

KGF_CM_TO_NM = 0.0980665  # torque unit conversion for datasheet values


class InvalidSpec(ValueError):
    """A world or robot description has out-of-range or inconsistent values."""


class OutOfBounds(ValueError):
    """A query point lies outside the drivable field."""


class ConfigError(ValueError):
    """A scenario/config file could not be parsed or resolved."""


class SurfaceKind(enum.Enum):
    SAND = "sand"
    CLAY = "clay"
    PAVEMENT = "pavement"
    CREVICE = "crevice"


@dataclass(frozen=True)
class SurfaceParams:
    """Traction and drag parameters of a ground patch."""

    kind: SurfaceKind
    static_friction: float  # wheel/soil static friction coefficient
    rolling_resistance: float  # rolling resistance coefficient

    def __post_init__(self) -> None:
        if not 0.0 < self.static_friction <= 1.5:
            raise InvalidSpec(f"static_friction out of range: {self.static_friction}")
        if not 0.0 <= self.rolling_resistance < 1.0:
            raise InvalidSpec(
                f"rolling_resistance out of range: {self.rolling_resistance}"
            )


SAND = SurfaceParams(SurfaceKind.SAND, static_friction=0.6, rolling_resistance=0.2)
CLAY = SurfaceParams(SurfaceKind.CLAY, static_friction=0.55, rolling_resistance=0.08)
PAVEMENT = SurfaceParams(
    SurfaceKind.PAVEMENT, static_friction=0.9, rolling_resistance=0.015
)


def crevice_params(base: SurfaceParams) -> SurfaceParams:
    """Surface inside an erosion crevice: half the grip, double the drag."""
    return SurfaceParams(
        SurfaceKind.CREVICE,
        static_friction=base.static_friction * 0.5,
        rolling_resistance=min(0.99, base.rolling_resistance * 2.0),
    )


class HeightClass(enum.Enum):
    """Crop growth stage; the canopy height drives sensing geometry."""

    H1 = "H1"  # ~1 m, young plants, open sky above the corridor
    H2 = "H2"  # ~2 m, walls close in, sky still open
    H3 = "H3"  # ~3 m, canopy closes over the corridor

    @property
    def canopy_height_m(self) -> float:
        return {"H1": 1.0, "H2": 2.0, "H3": 3.0}[self.value]


@dataclass(frozen=True)
class RobotParams:
    """Mechanical build of the tankette. Defaults match the field unit."""

    mass_kg: float = 130.0
    wheel_radius_m: float = 0.2
    track_width_m: float = 0.6  # lateral distance between wheel centerlines
    wheelbase_m: float = 0.55  # longitudinal distance between axles
    gear_ratio: float = 50.0  # motor shaft turns per wheel turn
    motor_rated_torque_nm: float = 1.57
    motor_free_speed_rpm: float = 3000.0
    ticks_per_motor_rev: int = 24  # hall counts per motor shaft revolution
    body_width_m: float = 1.0  # overall hull envelope
    body_length_m: float = 0.8
    slip_widening_factor: float = 1.2  # skid-steer effective track multiplier

    def __post_init__(self) -> None:
        positive = (
            "mass_kg",
            "wheel_radius_m",
            "track_width_m",
            "wheelbase_m",
            "motor_rated_torque_nm",
            "motor_free_speed_rpm",
            "body_width_m",
            "body_length_m",
        )
        for name in positive:
            if getattr(self, name) <= 0.0:
                raise InvalidSpec(f"{name} must be positive")
        if self.gear_ratio < 1.0:
            raise InvalidSpec("gear_ratio must be >= 1")
        if self.ticks_per_motor_rev < 1:
            raise InvalidSpec("ticks_per_motor_rev must be >= 1")
        if self.slip_widening_factor < 1.0:
            raise InvalidSpec("slip_widening_factor must be >= 1")


@dataclass(frozen=True)
class SunState:
    """Sun direction and attenuation used by the solar heading sensor."""

    azimuth_rad: float  # world-frame bearing of the sun, CCW from +x
    elevation_rad: float  # altitude above the horizon
    cloud_factor: float = 1.0  # 1 = full sun, 0 = fully occluded

    def __post_init__(self) -> None:
        if not 0.0 <= self.elevation_rad <= math.pi / 2:
            raise InvalidSpec(f"elevation_rad out of range: {self.elevation_rad}")
        if not 0.0 <= self.cloud_factor <= 1.0:
            raise InvalidSpec(f"cloud_factor out of range: {self.cloud_factor}")


Polygon = tuple[tuple[float, float], ...]


@dataclass
class ScenarioSpec:
    """Flat, serializable description of a field scenario."""

    seed: int = 0
    length_m: float = 50.0  # measured tunnel length (completion distance)
    row_overrun_m: float = 6.0  # rows keep going this far past the end
    row_spacing_m: float = 1.5  # distance between the two plant rows
    height_class: HeightClass = HeightClass.H1
    stem_pitch_m: float = 0.5  # along-row distance between stems
    stem_jitter_m: float = 0.05  # max lateral deviation of a stem from its row
    stem_radius_m: float = 0.015
    sand_fraction: float = 0.667  # remaining cells are clay
    canopy_overhang_m: float = 0.3  # corridor intrusion per side, H3 only
    crevices: tuple[Polygon, ...] = ()
    sun_azimuth_rad: float = 0.8
    sun_elevation_rad: float = 0.9
    cloud_factor: float = 1.0

    def sun(self) -> SunState:
        return SunState(self.sun_azimuth_rad, self.sun_elevation_rad, self.cloud_factor)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["height_class"] = self.height_class.value
        d["crevices"] = [[list(v) for v in poly] for poly in self.crevices]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        kw = dict(d)
        kw["height_class"] = HeightClass(kw.get("height_class", "H1"))
        kw["crevices"] = tuple(
            tuple((float(x), float(y)) for x, y in poly)
            for poly in kw.get("crevices", ())
        )
        return cls(**kw)


@dataclass(frozen=True, eq=False)
class Crevice:
    """Erosion gully: a surface-override polygon on the field."""

    polygon: np.ndarray  # (k, 2) vertices, k >= 3
    surface: SurfaceParams


@dataclass(frozen=True, eq=False)
class TunnelScenario:
    """Concrete scenario geometry expanded from a ScenarioSpec."""

    spec: ScenarioSpec
    stems_left: np.ndarray  # (n, 3): x, y, radius; the y > 0 row
    stems_right: np.ndarray  # (n, 3): the y < 0 row
    stems_all: np.ndarray  # (2n, 3): left block then right block
    crevices: tuple[Crevice, ...]
    bounds: tuple[float, float, float, float]  # x_min, x_max, y_min, y_max

    @property
    def length_m(self) -> float:
        return self.spec.length_m

    @property
    def row_spacing_m(self) -> float:
        return self.spec.row_spacing_m

    @property
    def height_class(self) -> HeightClass:
        return self.spec.height_class

    @property
    def canopy_overhang_m(self) -> float:
        """Lateral canopy intrusion per side; zero below H3."""
        if self.spec.height_class is HeightClass.H3:
            return self.spec.canopy_overhang_m
        return 0.0

    @property
    def wall_half_width_m(self) -> float:
        """Half-width of the visually open corridor."""
        return self.spec.row_spacing_m / 2.0 - self.canopy_overhang_m

    def all_stems(self) -> np.ndarray:
        return self.stems_all

    def contains(self, x: float, y: float) -> bool:
        x_min, x_max, y_min, y_max = self.bounds
        return x_min <= x <= x_max and y_min <= y <= y_max


def generate_tunnel(spec: ScenarioSpec) -> TunnelScenario:
    """Expand a spec into stem positions and crevice geometry.

    Deterministic in ``spec.seed``.  Stems are planted per side at
    x = (i + 0.5) * pitch over length + row_overrun (real rows do not stop
    at the surveyed mark, and corridor sensing needs geometry ahead of the
    finish line); exactly ``floor(length/pitch)`` of them sit within the
    measured tunnel.  The random draw only jitters stems laterally within
    +/- stem_jitter_m, so the guaranteed stem-free strip around the
    centerline has half-width ``row_spacing/2 - stem_jitter - stem_radius``.
    """
    if spec.length_m <= 0.0:
        raise InvalidSpec("length_m must be positive")
    if spec.row_overrun_m < 0.0:
        raise InvalidSpec("row_overrun_m must be >= 0")
    if spec.row_spacing_m <= 0.0:
        raise InvalidSpec("row_spacing_m must be positive")
    if spec.stem_pitch_m <= 0.0:
        raise InvalidSpec("stem_pitch_m must be positive")
    if spec.stem_radius_m <= 0.0:
        raise InvalidSpec("stem_radius_m must be positive")
    if spec.stem_jitter_m < 0.0:
        raise InvalidSpec("stem_jitter_m must be >= 0")
    if not 0.0 <= spec.sand_fraction <= 1.0:
        raise InvalidSpec(f"sand_fraction out of range: {spec.sand_fraction}")
    if spec.stem_jitter_m + spec.stem_radius_m >= spec.row_spacing_m / 2.0:
        raise InvalidSpec("stem jitter + radius would reach the corridor centerline")
    if not 0.0 <= spec.canopy_overhang_m < spec.row_spacing_m / 2.0:
        raise InvalidSpec("canopy_overhang_m must be in [0, row_spacing/2)")

    n = int(math.floor((spec.length_m + spec.row_overrun_m) / spec.stem_pitch_m))
    rng = substream(spec.seed, 0)
    xs = (np.arange(n) + 0.5) * spec.stem_pitch_m
    half = spec.row_spacing_m / 2.0
    sides = []
    for sign in (+1.0, -1.0):
        jitter = rng.uniform(-spec.stem_jitter_m, spec.stem_jitter_m, size=n)
        stems = np.column_stack(
            (xs, sign * half + jitter, np.full(n, spec.stem_radius_m))
        )
        stems.setflags(write=False)
        sides.append(stems)

    crevice_surface = crevice_params(SAND)
    crevices = []
    for poly in spec.crevices:
        if len(poly) < 3:
            raise InvalidSpec("crevice polygon needs at least 3 vertices")
        arr = np.asarray(poly, dtype=float)
        arr.setflags(write=False)
        crevices.append(Crevice(polygon=arr, surface=crevice_surface))

    bounds = (
        -_FIELD_MARGIN_M,
        spec.length_m + spec.row_overrun_m + _FIELD_MARGIN_M,
        -(half + _FIELD_MARGIN_M),
        half + _FIELD_MARGIN_M,
    )
    stems_all = np.vstack((sides[0], sides[1]))
    stems_all.setflags(write=False)
    return TunnelScenario(
        spec=spec,
        stems_left=sides[0],
        stems_right=sides[1],
        stems_all=stems_all,
        crevices=tuple(crevices),
        bounds=bounds,
    )


def point_in_polygon(polygon: np.ndarray, x: float, y: float) -> bool:
    """Even-odd crossing test; boundary points count as inside on the
    lower/left edges (consistent, exact for the axis-aligned common case)."""
    inside = False
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_cross:
                inside = not inside
    return inside


def surface_at(scenario: TunnelScenario, x: float, y: float) -> SurfaceParams:
    """Surface under a world point: crevice polygons win, then the
    deterministic sand/clay cell mix."""
    if not scenario.contains(x, y):
        raise OutOfBounds(f"({x:.2f}, {y:.2f}) outside the field")
    for crevice in scenario.crevices:
        if point_in_polygon(crevice.polygon, x, y):
            return crevice.surface
    cx = math.floor(x / SURFACE_CELL_M)
    cy = math.floor(y / SURFACE_CELL_M)
    u = unit_float(cx, cy, scenario.spec.seed, _SURFACE_SALT)
    return SAND if u < scenario.spec.sand_fraction else CLAY


# --- scenario files ---------------------------------------------------------

# Keys consumed by ScenarioSpec; everything else in a scenario file belongs
# to the run layer (start pose, nav.*, waypoints) and is validated there.
_WORLD_KEYS = {
    "seed",
    "length_m",
    "row_overrun_m",
    "row_spacing_m",
    "height_class",
    "stem_pitch_m",
    "stem_jitter_m",
    "stem_radius_m",
    "sand_fraction",
    "canopy_overhang_m",
    "crevice",
    "sun_azimuth_rad",
    "sun_elevation_rad",
    "cloud_factor",
}

_RUN_KEYS = {
    "start_x_m",
    "start_y_m",
    "start_theta_rad",
    "duration_s",
    "waypoint",
    "nav.mode",
    "nav.k_y",
    "nav.k_theta",
    "nav.v_ref",
    "nav.lookahead_m",
    "nav.arrival_radius_m",
}

_REPEATED_KEYS = {"crevice", "waypoint"}


def parse_scenario_text(text: str) -> dict:
    """Parse the flat ``key = value`` scenario format into a dict.

    Repeated keys (``crevice``, ``waypoint``) accumulate into lists.  Raises
    ConfigError on unknown keys, bad values, or duplicate scalar keys.
    """
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _WORLD_KEYS and key not in _RUN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        try:
            parsed = _parse_value(key, value)
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"line {lineno}: bad value for '{key}': {value}") from exc
        if key in _REPEATED_KEYS:
            out.setdefault(key, []).append(parsed)
        elif key in out:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        else:
            out[key] = parsed
    return out


def parse_scenario_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario_text(fh.read())


def _parse_value(key: str, value: str):
    if key == "seed":
        return int(value, 0)
    if key == "height_class":
        try:
            return HeightClass(value.upper())
        except ValueError:
            raise ValueError(value) from None
    if key == "nav.mode":
        return value.lower()
    if key == "crevice":
        poly = tuple(_parse_point(tok) for tok in value.split())
        if len(poly) < 3:
            raise ValueError("crevice polygon needs >= 3 vertices")
        return poly
    if key == "waypoint":
        return _parse_point(value)
    return float(value)


def _parse_point(token: str) -> tuple[float, float]:
    x, y = token.split(",")
    return (float(x), float(y))


def scenario_spec_from_dict(d: dict) -> ScenarioSpec:
    """Build a ScenarioSpec from parsed file keys (run-layer keys ignored)."""
    kw: dict = {}
    for key, value in d.items():
        if key in _RUN_KEYS:
            continue
        if key == "crevice":
            kw["crevices"] = tuple(value)
        else:
            kw[key] = value
    try:
        return ScenarioSpec(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
