"""Shared helpers for the test suite."""

import numpy as np

from depthproj.depth_image import DenseDepthMap, SparseDepthMap
from depthproj.geometry import CameraIntrinsics, CameraRig, RigCamera, RigidTransform


def small_intrinsics(width=160, height=120, f=130.0):
    return CameraIntrinsics(fx=f, fy=f, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0,
                            width=width, height=height)


def small_rig(width=160, height=120, baseline=0.3):
    k = small_intrinsics(width, height)
    return CameraRig(
        lidar=k,
        cameras=(
            RigCamera("left", k, RigidTransform.from_translation(+baseline, 0, 0)),
            RigCamera("right", k, RigidTransform.from_translation(-baseline, 0, 0)),
        ),
    )


def random_rotation(rng):
    """Uniform-ish random rotation via QR of a gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_sparse(rng, width=40, height=30, density=0.2, lo=1.0, hi=50.0,
                  provenance="projected"):
    valid = rng.random((height, width)) < density
    values = np.where(valid, rng.uniform(lo, hi, (height, width)), 0.0)
    return SparseDepthMap(values, valid, provenance=provenance)


def random_dense(rng, width=40, height=30, lo=1.0, hi=50.0):
    return DenseDepthMap(rng.uniform(lo, hi, (height, width)),
                         np.ones((height, width), bool))
