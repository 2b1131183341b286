"""Scatter a sparse depth map from one camera into another camera's grid.

For every valid source pixel: backproject with the source intrinsics,
apply the rigid transform, project with the target intrinsics, round the
continuous coordinates to the nearest pixel center (ties to even) and
write the transformed z as the depth. There is deliberately no z-buffering
against any dense surface, so points from occluded background freely land
on pixels where no foreground point covers them. That is the see-through
effect this module exists to create.

When two source points land on the same target pixel the smaller depth
wins, which is physical for identical rays and makes the result
independent of traversal order (and therefore of any internal
parallelism). Out-of-frustum and behind-camera points are dropped but
counted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .depth_image import SparseDepthMap
from .errors import DimensionMismatchError
from .geometry import CameraIntrinsics, CameraRig, RigidTransform, transform_point


@dataclass(frozen=True)
class ProjectionStats:
    in_bounds: int
    out_of_bounds: int
    behind_camera: int
    collisions: int

    def as_dict(self) -> dict:
        return {
            "in_bounds": self.in_bounds,
            "out_of_bounds": self.out_of_bounds,
            "behind_camera": self.behind_camera,
            "collisions": self.collisions,
        }


@dataclass(frozen=True)
class ProjectionResult:
    projected: SparseDepthMap
    stats: ProjectionStats


def project_sparse(src: SparseDepthMap, k_src: CameraIntrinsics,
                   transform: RigidTransform, k_dst: CameraIntrinsics) -> ProjectionResult:
    """Project a sparse map into the target camera; see module docstring."""
    if (src.width, src.height) != (k_src.width, k_src.height):
        raise DimensionMismatchError(
            f"source map {src.width}x{src.height} does not match source "
            f"intrinsics {k_src.width}x{k_src.height}")

    vv, uu = np.nonzero(src.valid)
    d = src.values[vv, uu]
    x = (uu - k_src.cx) * d / k_src.fx
    y = (vv - k_src.cy) * d / k_src.fy
    pts = transform_point(transform, np.stack([x, y, d], axis=-1))
    if pts.size == 0:
        pts = pts.reshape(0, 3)

    z2 = pts[:, 2]
    ahead = z2 > 0
    safe_z = np.where(ahead, z2, 1.0)
    u2 = np.rint(k_dst.fx * pts[:, 0] / safe_z + k_dst.cx)
    v2 = np.rint(k_dst.fy * pts[:, 1] / safe_z + k_dst.cy)
    inb = ahead & (u2 >= 0) & (u2 < k_dst.width) & (v2 >= 0) & (v2 < k_dst.height)

    ui = np.ascontiguousarray(u2[inb].astype(np.int64))
    vi = np.ascontiguousarray(v2[inb].astype(np.int64))
    zs = np.ascontiguousarray(z2[inb])
    grid = np.asarray(_kernels.scatter_min(ui, vi, zs, k_dst.height, k_dst.width))
    valid = np.isfinite(grid)

    n_behind = int((~ahead).sum())
    n_in = int(inb.sum())
    n_out = int(len(d)) - n_in - n_behind
    stats = ProjectionStats(
        in_bounds=n_in,
        out_of_bounds=n_out,
        behind_camera=n_behind,
        collisions=n_in - int(valid.sum()),
    )
    projected = SparseDepthMap(np.where(valid, grid, 0.0), valid, provenance="projected")
    return ProjectionResult(projected=projected, stats=stats)


def project_to_rig_camera(src: SparseDepthMap, rig: CameraRig, name: str) -> ProjectionResult:
    cam = rig.camera(name)
    return project_sparse(src, rig.lidar, cam.from_lidar, cam.intrinsics)


def random_target_camera(rig: CameraRig, seed: int) -> str:
    """Pick one of the rig's RGB cameras uniformly at random (seeded)."""
    rng = np.random.default_rng(seed)
    return rig.names[int(rng.integers(len(rig.names)))]
