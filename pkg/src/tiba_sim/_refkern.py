"""NumPy reference implementation of the hot per-beam / per-pixel kernels.

The compiled twin in ``_core.pyx`` performs the same elementary float
operations in the same order, so the two backends agree bit for bit.
Trigonometry stays OUT of the kernels on purpose: callers precompute
direction cosines with NumPy so both backends consume identical inputs.
"""

from __future__ import annotations

import numpy as np


def raycast_circles(
    dir_x: np.ndarray,
    dir_y: np.ndarray,
    px: float,
    py: float,
    circles: np.ndarray,
    max_range: float,
) -> np.ndarray:
    """Nearest forward intersection of each ray with any circle.

    dir_x/dir_y are unit direction components per beam; circles is (m, 3)
    rows of center x, center y, radius.  Beams that hit nothing (or only
    things behind the origin) return max_range.
    """
    n = dir_x.shape[0]
    if circles.shape[0] == 0:
        return np.full(n, max_range)
    ox = circles[:, 0] - px
    oy = circles[:, 1] - py
    r = circles[:, 2]
    b = np.outer(dir_x, ox) + np.outer(dir_y, oy)  # projection onto the ray
    c = ox * ox + oy * oy - r * r  # squared miss distance at closest approach
    disc = b * b - c[None, :]
    ok = (b >= 0.0) & (disc >= 0.0)
    t = np.where(ok, b - np.sqrt(np.where(ok, disc, 0.0)), np.inf)
    t = np.where(t >= 0.0, t, np.inf)
    best = t.min(axis=1)
    return np.where(best < max_range, best, max_range)


def thermal_field(
    lat_row: np.ndarray,
    cos_theta: float,
    yb: np.ndarray,
    row_valid: np.ndarray,
    y_wall: float,
    kerb_inner: float,
    t_ground: float,
    t_kerb: float,
    t_plant: float,
    has_kerb: bool,
) -> np.ndarray:
    """Classify every pixel's ground point into path / kerb / plant temps.

    lat_row[v] is the world-lateral coordinate contribution shared by row v
    (robot y plus the heading-rotated forward offset); yb[v, u] is the
    body-lateral ground coordinate of the pixel.  Rows with row_valid false
    look above the horizon and render as plant canopy.
    """
    lateral = lat_row[:, None] + cos_theta * yb
    off = np.abs(lateral)
    out = np.full(yb.shape, t_plant)
    ground = row_valid[:, None] & (off < y_wall)
    if has_kerb:
        out[ground & (off >= kerb_inner)] = t_kerb
        out[ground & (off < kerb_inner)] = t_ground
    else:
        out[ground] = t_ground
    return out
