"""Numpy implementations of the per-pixel kernels.

These are the reference semantics; the compiled backend in `_speed.pyx`
must produce bit-identical float64 results. Every formula here is written
so that each output element is the same IEEE expression the compiled loop
evaluates (division guarded against zero direction components instead of
relying on inf/NaN propagation).
"""

from __future__ import annotations

import numpy as np


def raycast(origin, dirs, bg_z, boxes):
    """Nearest intersection parameter per ray, inf on miss.

    origin: (3,) ray origin in world frame.
    dirs:   (n, 3) unnormalized directions; with directions built from
            camera rays whose z-component is 1, the returned parameter is
            the camera-frame z-depth.
    bg_z:   background plane z.
    boxes:  (b, 6) rows of (xmin, ymin, zmin, xmax, ymax, zmax).
    """
    origin = np.asarray(origin, dtype=np.float64)
    dirs = np.asarray(dirs, dtype=np.float64)
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 6)
    n = dirs.shape[0]
    best = np.full(n, np.inf)

    dz = dirs[:, 2]
    nonzero = dz != 0.0
    s = (bg_z - origin[2]) / np.where(nonzero, dz, 1.0)
    hit = nonzero & (s > 0.0)
    best = np.where(hit & (s < best), s, best)

    for b in range(boxes.shape[0]):
        tnear = np.full(n, -np.inf)
        tfar = np.full(n, np.inf)
        ok = np.ones(n, dtype=bool)
        for axis in range(3):
            d = dirs[:, axis]
            o = origin[axis]
            lo, hi = boxes[b, axis], boxes[b, axis + 3]
            zero = d == 0.0
            ok &= ~(zero & ((o < lo) | (o > hi)))
            safe = np.where(zero, 1.0, d)
            t1 = (lo - o) / safe
            t2 = (hi - o) / safe
            near = np.minimum(t1, t2)
            far = np.maximum(t1, t2)
            tnear = np.where(zero, tnear, np.maximum(tnear, near))
            tfar = np.where(zero, tfar, np.minimum(tfar, far))
        ok &= (tnear > 0.0) & (tnear <= tfar)
        best = np.where(ok & (tnear < best), tnear, best)
    return best


def scatter_min(ui, vi, z, height, width):
    """Scatter depths into a grid keeping the minimum per cell; inf = empty.

    Order-independent by construction, so results do not depend on how the
    input points are batched or scheduled.
    """
    grid = np.full((height, width), np.inf)
    np.minimum.at(grid, (np.asarray(vi), np.asarray(ui)), np.asarray(z, dtype=np.float64))
    return grid


def tile_min(values, valid, wp):
    """Minimum valid value per non-overlapping wp x wp tile; inf = empty tile.

    Border tiles are ragged (smaller); padding uses +inf so minima are
    unaffected.
    """
    values = np.asarray(values, dtype=np.float64)
    valid = np.asarray(valid, dtype=bool)
    h, w = values.shape
    th = -(-h // wp)
    tw = -(-w // wp)
    padded = np.full((th * wp, tw * wp), np.inf)
    padded[:h, :w] = np.where(valid, values, np.inf)
    return padded.reshape(th, wp, tw, wp).min(axis=(1, 3))
