"""Pinhole cameras, rigid transforms, and point projection.

Conventions used throughout the package:

* pixel coordinates are (u, v) = (column, row), origin at the top-left,
  pixel centers at integer coordinates;
* camera frames are right-handed with x right, y down, z forward
  (a point is visible only if z > 0);
* a RigidTransform maps points as ``R @ p + t``.

All operations are pure functions on immutable inputs and accept either
scalars or numpy arrays (batched along leading axes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kvconfig
from .errors import BehindCameraError, ConfigError, InvalidDepthError, OutOfBoundsError

_ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics: focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ConfigError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if self.width < 1 or self.height < 1:
            raise ConfigError(f"image size must be at least 1x1, got {self.width}x{self.height}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ConfigError(
                f"principal point ({self.cx}, {self.cy}) outside {self.width}x{self.height} image"
            )

    @classmethod
    def from_fov(cls, width: int, height: int, fov_deg: float) -> "CameraIntrinsics":
        """Square-pixel intrinsics for a given horizontal field of view.

        fx = fy = (width / 2) / tan(fov / 2), principal point at the image
        center of the integer pixel grid, (width - 1) / 2.
        """
        f = (width / 2.0) / math.tan(math.radians(fov_deg) / 2.0)
        return cls(fx=f, fy=f, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0,
                   width=width, height=height)

    def crop(self, x0: int, y0: int, width: int, height: int) -> "CameraIntrinsics":
        """Intrinsics of the sub-image starting at pixel (x0, y0)."""
        if x0 < 0 or y0 < 0 or x0 + width > self.width or y0 + height > self.height:
            raise ConfigError("crop window exceeds image bounds")
        return CameraIntrinsics(self.fx, self.fy, self.cx - x0, self.cy - y0, width, height)


@dataclass(frozen=True)
class RigidTransform:
    """Rotation plus translation; rotation must be orthonormal with det +1."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if np.max(np.abs(r.T @ r - np.eye(3))) > _ORTHO_TOL:
            raise ConfigError("rotation is not orthonormal (tolerance 1e-9)")
        if abs(np.linalg.det(r) - 1.0) > _ORTHO_TOL:
            raise ConfigError("rotation determinant is not +1 (tolerance 1e-9)")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_translation(cls, tx: float, ty: float, tz: float) -> "RigidTransform":
        return cls(np.eye(3), np.array([tx, ty, tz], dtype=np.float64))

    @classmethod
    def rotation_y(cls, angle_rad: float, translation=(0.0, 0.0, 0.0)) -> "RigidTransform":
        c, s = math.cos(angle_rad), math.sin(angle_rad)
        r = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
        return cls(r, np.asarray(translation, dtype=np.float64))


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Transform applying b first, then a."""
    return RigidTransform(a.rotation @ b.rotation,
                          a.rotation @ b.translation + a.translation)


def inverse(t: RigidTransform) -> RigidTransform:
    return RigidTransform(t.rotation.T, -(t.rotation.T @ t.translation))


def transform_point(t: RigidTransform, p) -> np.ndarray:
    """Apply R @ p + t. `p` is one point (3,) or a batch (..., 3)."""
    p = np.asarray(p, dtype=np.float64)
    return p @ t.rotation.T + t.translation


def backproject(pixel, depth, k: CameraIntrinsics) -> np.ndarray:
    """Lift pixel coordinates with known depth to a 3D point in camera frame.

    Returns ((u - cx) * d / fx, (v - cy) * d / fy, d). Projecting the result
    back with the same intrinsics recovers (u, v) up to float rounding.

    Raises InvalidDepthError for non-positive depth and OutOfBoundsError for
    pixels outside the image grid.
    """
    u = np.asarray(pixel[0], dtype=np.float64)
    v = np.asarray(pixel[1], dtype=np.float64)
    d = np.asarray(depth, dtype=np.float64)
    if np.any(~(d > 0) | ~np.isfinite(d)):
        raise InvalidDepthError("backproject requires depth > 0")
    if np.any((u < 0) | (u > k.width - 1) | (v < 0) | (v > k.height - 1)):
        raise OutOfBoundsError(f"pixel outside {k.width}x{k.height} grid")
    x = (u - k.cx) * d / k.fx
    y = (v - k.cy) * d / k.fy
    x, y, z = np.broadcast_arrays(x, y, d)
    return np.stack([x, y, z], axis=-1)


def project(point, k: CameraIntrinsics):
    """Project camera-frame points to continuous pixel coordinates.

    Returns (u, v, depth) with u = fx * x / z + cx and v = fy * y / z + cy.
    No bounds check is performed; callers clip. The returned depth is the
    point's z, passed through unchanged.

    Raises BehindCameraError if any z <= 0.
    """
    p = np.asarray(point, dtype=np.float64)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    if np.any(~(z > 0)):
        raise BehindCameraError("project requires z > 0")
    u = k.fx * x / z + k.cx
    v = k.fy * y / z + k.cy
    if p.ndim == 1:
        return float(u), float(v), float(z)
    return u, v, z


@dataclass(frozen=True)
class RigCamera:
    """One RGB camera of a rig: name, intrinsics, transform from LiDAR frame."""

    name: str
    intrinsics: CameraIntrinsics
    from_lidar: RigidTransform


@dataclass(frozen=True)
class CameraRig:
    """A virtual LiDAR camera plus at least one RGB camera."""

    lidar: CameraIntrinsics
    cameras: tuple

    def __post_init__(self):
        cams = tuple(self.cameras)
        if not cams:
            raise ConfigError("rig needs at least one RGB camera")
        names = [c.name for c in cams]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate camera names in rig: {names}")
        object.__setattr__(self, "cameras", cams)

    @property
    def names(self) -> tuple:
        return tuple(c.name for c in self.cameras)

    def camera(self, name: str) -> RigCamera:
        for c in self.cameras:
            if c.name == name:
                return c
        raise ConfigError(f"rig has no camera named {name!r}; choose from {self.names}")


# Default rendering geometry: a 1392x1392 image with a 90 degree field of
# view, center-cropped to 1216x356 and then bottom-cropped to 1216x256.
FULL_SIZE = 1392
CROP_W, CROP_H_CENTER, CROP_H = 1216, 356, 256
CROP_X0 = (FULL_SIZE - CROP_W) // 2
CROP_Y0 = (FULL_SIZE - CROP_H_CENTER) // 2 + (CROP_H_CENTER - CROP_H)


def default_intrinsics(full: bool = False) -> CameraIntrinsics:
    """The rig camera model, either full-frame or with the standard crop."""
    k = CameraIntrinsics.from_fov(FULL_SIZE, FULL_SIZE, 90.0)
    if full:
        return k
    return k.crop(CROP_X0, CROP_Y0, CROP_W, CROP_H)


def default_rig(baseline: float = 0.5, full: bool = False) -> CameraRig:
    """LiDAR camera at the origin, left/right RGB cameras offset along x.

    `baseline` is the distance in meters from the LiDAR to each RGB camera.
    A camera sitting at x = +b in the LiDAR frame maps points with t = -b.
    """
    k = default_intrinsics(full=full)
    return CameraRig(
        lidar=k,
        cameras=(
            RigCamera("left", k, RigidTransform.from_translation(+baseline, 0.0, 0.0)),
            RigCamera("right", k, RigidTransform.from_translation(-baseline, 0.0, 0.0)),
        ),
    )


def camera_center(t: RigidTransform) -> np.ndarray:
    """Position of the camera (origin of the camera frame) in the source frame."""
    return -(t.rotation.T @ t.translation)


# Calibration files use the key = value block grammar (kvconfig). One block
# per camera with keys: name, K (fx fy cx cy), size (width height),
# R (9 numbers row-major), t (3 numbers, meters). The first block must be the
# LiDAR camera, named "lidar", with an identity R|t; every later block gives
# the transform from the LiDAR frame to that camera.

def load_calibration(path) -> CameraRig:
    blocks = kvconfig.parse_blocks_file(path)
    src = str(path)
    if not blocks:
        raise ConfigError(f"{src}: empty calibration file")
    cams = []
    lidar_k = None
    for i, block in enumerate(blocks):
        name = kvconfig.require(block, "name", src)
        fx, fy, cx, cy = kvconfig.floats(block, "K", 4, src)
        width, height = kvconfig.ints(block, "size", 2, src)
        r = np.array(kvconfig.floats(block, "R", 9, src)).reshape(3, 3)
        t = np.array(kvconfig.floats(block, "t", 3, src))
        k = CameraIntrinsics(fx, fy, cx, cy, width, height)
        transform = RigidTransform(r, t)
        if i == 0:
            if name != "lidar":
                raise ConfigError(f"{src}: first camera block must be named 'lidar'")
            if np.max(np.abs(r - np.eye(3))) > _ORTHO_TOL or np.max(np.abs(t)) > _ORTHO_TOL:
                raise ConfigError(f"{src}: the lidar block must carry an identity R|t")
            lidar_k = k
        else:
            cams.append(RigCamera(name, k, transform))
    if lidar_k is None or not cams:
        raise ConfigError(f"{src}: calibration needs a lidar block and at least one RGB camera")
    return CameraRig(lidar=lidar_k, cameras=tuple(cams))


def save_calibration(rig: CameraRig, path) -> None:
    def block(name, k, transform):
        r = " ".join(repr(float(x)) for x in np.asarray(transform.rotation).ravel())
        t = " ".join(repr(float(x)) for x in np.asarray(transform.translation))
        return (
            f"name = {name}\n"
            f"K = {float(k.fx)!r} {float(k.fy)!r} {float(k.cx)!r} {float(k.cy)!r}\n"
            f"size = {k.width} {k.height}\n"
            f"R = {r}\n"
            f"t = {t}\n"
        )

    parts = [block("lidar", rig.lidar, RigidTransform.identity())]
    for cam in rig.cameras:
        parts.append(block(cam.name, cam.intrinsics, cam.from_lidar))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
