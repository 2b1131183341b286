# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-pixel kernels.

Same contracts as `_pure`; results must be bit-identical. The scalar
expressions below mirror the numpy formulas operation for operation, which
is what makes the two backends interchangeable in tests and pipelines.
"""

import numpy as np

from libc.math cimport INFINITY


def raycast(const double[::1] origin, const double[:, ::1] dirs, double bg_z,
            const double[:, ::1] boxes):
    cdef Py_ssize_t n = dirs.shape[0]
    cdef Py_ssize_t nb = boxes.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef double best, dz, s, tnear, tfar, d, o, lo, hi, t1, t2, tmp
    cdef Py_ssize_t i, b, axis
    cdef bint ok
    for i in range(n):
        best = INFINITY
        dz = dirs[i, 2]
        if dz != 0.0:
            s = (bg_z - oz) / dz
            if s > 0.0 and s < best:
                best = s
        for b in range(nb):
            tnear = -INFINITY
            tfar = INFINITY
            ok = True
            for axis in range(3):
                d = dirs[i, axis]
                if axis == 0:
                    o = ox
                elif axis == 1:
                    o = oy
                else:
                    o = oz
                lo = boxes[b, axis]
                hi = boxes[b, axis + 3]
                if d == 0.0:
                    if o < lo or o > hi:
                        ok = False
                        break
                else:
                    t1 = (lo - o) / d
                    t2 = (hi - o) / d
                    if t1 > t2:
                        tmp = t1
                        t1 = t2
                        t2 = tmp
                    if t1 > tnear:
                        tnear = t1
                    if t2 < tfar:
                        tfar = t2
            if ok and tnear > 0.0 and tnear <= tfar and tnear < best:
                best = tnear
        res[i] = best
    return out


def scatter_min(const long long[::1] ui, const long long[::1] vi, const double[::1] z,
                Py_ssize_t height, Py_ssize_t width):
    out = np.full((height, width), np.inf)
    cdef double[:, ::1] grid = out
    cdef Py_ssize_t k
    cdef Py_ssize_t n = ui.shape[0]
    for k in range(n):
        if z[k] < grid[vi[k], ui[k]]:
            grid[vi[k], ui[k]] = z[k]
    return out


def tile_min(const double[:, ::1] values, const unsigned char[:, ::1] valid, Py_ssize_t wp):
    cdef Py_ssize_t h = values.shape[0]
    cdef Py_ssize_t w = values.shape[1]
    cdef Py_ssize_t th = (h + wp - 1) // wp
    cdef Py_ssize_t tw = (w + wp - 1) // wp
    out = np.full((th, tw), np.inf)
    cdef double[:, ::1] grid = out
    cdef Py_ssize_t r, c
    cdef double v
    for r in range(h):
        for c in range(w):
            if valid[r, c]:
                v = values[r, c]
                if v < grid[r // wp, c // wp]:
                    grid[r // wp, c // wp] = v
    return out
