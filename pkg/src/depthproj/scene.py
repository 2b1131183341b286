"""Procedural scenes with exact ray-cast depth.

A scene is a fronto-parallel background plane plus axis-aligned boxes in a
world frame (by convention, the world frame is the LiDAR camera frame).
Rendering intersects one ray per pixel center with every primitive and
keeps the nearest hit, so the produced depth is exact to floating point:
there is no rasterization, interpolation or anti-aliasing. That exactness
is what lets rendered maps serve as ground truth when labelling projected
points as clean or noisy.

Scene files are plain text, one primitive per line:

    bg z=<meters>
    box <cx> <cy> <cz> <ex> <ey> <ez>

where (cx, cy, cz) is the box center and (ex, ey, ez) are full edge
lengths, all in meters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .depth_image import DenseDepthMap, SparseDepthMap
from .errors import (ConfigError, CoverageError, DimensionMismatchError,
                     FormatError, SceneError)
from .geometry import CameraIntrinsics, RigidTransform, camera_center

DEFAULT_NOISE_TOL = 0.3


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by center and full extents (meters)."""

    center: tuple
    size: tuple

    def __post_init__(self):
        center = tuple(float(c) for c in self.center)
        size = tuple(float(s) for s in self.size)
        if len(center) != 3 or len(size) != 3:
            raise SceneError("box center and size must have 3 components")
        if min(size) <= 0:
            raise SceneError(f"box extents must be positive, got {size}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "size", size)

    @property
    def lo(self) -> tuple:
        return tuple(c - s / 2.0 for c, s in zip(self.center, self.size))

    @property
    def hi(self) -> tuple:
        return tuple(c + s / 2.0 for c, s in zip(self.center, self.size))


@dataclass(frozen=True)
class Scene:
    """Background plane at z = background_z plus occluder boxes."""

    background_z: float
    occluders: tuple
    seed: int | None = None

    def __post_init__(self):
        occluders = tuple(self.occluders)
        if not (self.background_z > 0):
            raise SceneError("background plane must be at positive depth")
        for box in occluders:
            if box.hi[2] >= self.background_z:
                raise SceneError(
                    f"occluder far face {box.hi[2]} not in front of background "
                    f"{self.background_z}")
            if box.lo[2] <= 0:
                raise SceneError("occluder must lie strictly in front of the camera plane")
        object.__setattr__(self, "occluders", occluders)

    def boxes_array(self) -> np.ndarray:
        """(n, 6) rows of (xmin, ymin, zmin, xmax, ymax, zmax)."""
        if not self.occluders:
            return np.zeros((0, 6), dtype=np.float64)
        return np.array([list(b.lo) + list(b.hi) for b in self.occluders], dtype=np.float64)


@dataclass(frozen=True)
class SceneGenConfig:
    """Ranges for the random scene generator; all distances in meters.

    `lateral` bounds box centers in x, `vertical` in y. The vertical
    default matches the default rig's cropped field of view, which sees
    roughly y in [-0.1 z, +0.26 z].
    """

    n_occluders: int = 3
    occluder_depth: tuple = (4.0, 8.0)
    background_depth: tuple = (18.0, 22.0)
    extent: tuple = (0.5, 2.5)
    lateral: tuple = (-6.0, 6.0)
    vertical: tuple = (-0.5, 1.5)
    seed: int = 0

    def __post_init__(self):
        for name in ("occluder_depth", "background_depth", "extent", "lateral", "vertical"):
            lo, hi = getattr(self, name)
            if not (lo <= hi):
                raise ConfigError(f"{name} range is empty: {lo} > {hi}")
        if self.n_occluders < 0:
            raise ConfigError("n_occluders must be non-negative")
        if self.extent[0] <= 0:
            raise ConfigError("extents must be positive")
        if self.occluder_depth[0] - self.extent[1] / 2.0 <= 0:
            raise ConfigError("occluders could extend behind the camera plane")
        if self.n_occluders > 0 and (
                self.occluder_depth[1] + self.extent[1] / 2.0 >= self.background_depth[0]):
            raise ConfigError("occluder depth range reaches beyond the background plane")


def generate_scene(cfg: SceneGenConfig) -> Scene:
    """Deterministic scene for a given config and seed."""
    rng = np.random.default_rng(cfg.seed)
    bg = float(rng.uniform(*cfg.background_depth))
    boxes = []
    for _ in range(cfg.n_occluders):
        cz = float(rng.uniform(*cfg.occluder_depth))
        cx = float(rng.uniform(*cfg.lateral))
        cy = float(rng.uniform(*cfg.vertical))
        size = tuple(float(s) for s in rng.uniform(cfg.extent[0], cfg.extent[1], size=3))
        boxes.append(Box((cx, cy, cz), size))
    return Scene(background_z=bg, occluders=tuple(boxes), seed=cfg.seed)


def camera_rays(k: CameraIntrinsics, pose: RigidTransform):
    """Origin and per-pixel ray directions in the world frame.

    Directions are images of the camera rays ((u-cx)/fx, (v-cy)/fy, 1), so
    the ray parameter at an intersection equals the camera-frame z-depth.
    """
    us = np.arange(k.width, dtype=np.float64)
    vs = np.arange(k.height, dtype=np.float64)
    dirs = np.empty((k.height, k.width, 3), dtype=np.float64)
    dirs[..., 0] = ((us - k.cx) / k.fx)[None, :]
    dirs[..., 1] = ((vs - k.cy) / k.fy)[:, None]
    dirs[..., 2] = 1.0
    r = pose.rotation
    origin = np.ascontiguousarray(camera_center(pose))
    dirs_world = np.ascontiguousarray(dirs.reshape(-1, 3) @ r)
    return origin, dirs_world


def render_depth(scene: Scene, pose: RigidTransform, k: CameraIntrinsics) -> DenseDepthMap:
    """Exact nearest-hit depth at every pixel center; misses are invalid."""
    origin, dirs = camera_rays(k, pose)
    boxes = np.ascontiguousarray(scene.boxes_array())
    t = _kernels.raycast(origin, dirs, float(scene.background_z), boxes)
    t = np.asarray(t).reshape(k.height, k.width)
    valid = np.isfinite(t)
    return DenseDepthMap(np.where(valid, t, 0.0), valid)


def oracle_label(points: SparseDepthMap, truth: DenseDepthMap,
                 tol: float = DEFAULT_NOISE_TOL) -> np.ndarray:
    """Per-pixel noisy flag: |point - truth| > tol at valid points.

    Requires truth coverage under every valid point; pixels without a point
    are False. The boundary case |error| == tol counts as clean.
    """
    if (points.height, points.width) != (truth.height, truth.width):
        raise DimensionMismatchError("points and truth dimensions differ")
    if tol < 0:
        raise ConfigError("tolerance must be non-negative")
    uncovered = points.valid & ~truth.valid
    if uncovered.any():
        raise CoverageError(f"{int(uncovered.sum())} points lack ground truth coverage")
    return points.valid & (np.abs(points.values - truth.values) > tol)


def save_scene(scene: Scene, path) -> None:
    lines = [f"bg z={scene.background_z!r}"]
    for b in scene.occluders:
        c, s = b.center, b.size
        lines.append(f"box {c[0]!r} {c[1]!r} {c[2]!r} {s[0]!r} {s[1]!r} {s[2]!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_scene(path) -> Scene:
    bg = None
    boxes = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if tokens[0] == "bg":
                if len(tokens) != 2 or not tokens[1].startswith("z="):
                    raise FormatError(f"{path}:{lineno}: expected 'bg z=<m>'")
                if bg is not None:
                    raise FormatError(f"{path}:{lineno}: more than one background plane")
                bg = float(tokens[1][2:])
            elif tokens[0] == "box":
                if len(tokens) != 7:
                    raise FormatError(f"{path}:{lineno}: box needs 6 numbers")
                vals = [float(t) for t in tokens[1:]]
                boxes.append(Box(tuple(vals[:3]), tuple(vals[3:])))
            else:
                raise FormatError(f"{path}:{lineno}: unknown primitive {tokens[0]!r}")
    if bg is None:
        raise FormatError(f"{path}: scene has no background plane")
    return Scene(background_z=bg, occluders=tuple(boxes), seed=None)
