# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in _refkern.py.

Each function performs the same elementary float operations in the same
order as the NumPy reference, and the build passes -ffp-contract=off so
the C compiler cannot fuse multiply-add chains into differently rounded
FMA instructions.  That keeps the two backends bit-identical, which the
test suite asserts.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, sqrt

cnp.import_array()


def raycast_circles(
    const double[::1] dir_x,
    const double[::1] dir_y,
    double px,
    double py,
    const double[:, ::1] circles,
    double max_range,
):
    cdef Py_ssize_t n = dir_x.shape[0]
    cdef Py_ssize_t m = circles.shape[0]
    out_arr = np.full(n, max_range)
    cdef double[::1] out = out_arr
    if m == 0:
        return out_arr
    ox_arr = np.empty(m)
    oy_arr = np.empty(m)
    c_arr = np.empty(m)
    cdef double[::1] ox = ox_arr
    cdef double[::1] oy = oy_arr
    cdef double[::1] cc = c_arr
    cdef Py_ssize_t i, j
    cdef double o_x, o_y, r, dx, dy, b, disc, t, best
    for j in range(m):
        o_x = circles[j, 0] - px
        o_y = circles[j, 1] - py
        r = circles[j, 2]
        ox[j] = o_x
        oy[j] = o_y
        cc[j] = o_x * o_x + o_y * o_y - r * r
    for i in range(n):
        dx = dir_x[i]
        dy = dir_y[i]
        best = INFINITY
        for j in range(m):
            b = dx * ox[j] + dy * oy[j]
            if b >= 0.0:
                disc = b * b - cc[j]
                if disc >= 0.0:
                    t = b - sqrt(disc)
                    if 0.0 <= t < best:
                        best = t
        if best < max_range:
            out[i] = best
    return out_arr


def thermal_field(
    const double[::1] lat_row,
    double cos_theta,
    const double[:, ::1] yb,
    row_valid,
    double y_wall,
    double kerb_inner,
    double t_ground,
    double t_kerb,
    double t_plant,
    bint has_kerb,
):
    cdef const cnp.uint8_t[::1] valid = row_valid.view(np.uint8)
    cdef Py_ssize_t h = yb.shape[0]
    cdef Py_ssize_t w = yb.shape[1]
    out_arr = np.empty((h, w))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t v, u
    cdef double lr, off
    for v in range(h):
        lr = lat_row[v]
        if not valid[v]:
            for u in range(w):
                out[v, u] = t_plant
            continue
        for u in range(w):
            off = fabs(lr + cos_theta * yb[v, u])
            if off < y_wall:
                if has_kerb and off >= kerb_inner:
                    out[v, u] = t_kerb
                else:
                    out[v, u] = t_ground
            else:
                out[v, u] = t_plant
    return out_arr
