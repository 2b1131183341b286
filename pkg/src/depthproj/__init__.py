"""depthproj: simulate, filter and evaluate LiDAR-to-camera projection noise.

The package covers the data side of sparse-to-dense depth completion
without any neural networks: rendering exact synthetic depth, sparsifying
it like a real sensor, re-projecting it between cameras (which creates
quantization and see-through noise), extracting a reliable subset by
min-pool filtering, and scoring everything with standard depth metrics.
"""

from ._kernels import BACKEND as kernel_backend
from .depth_image import (BinaryMask, DenseDepthMap, SparseDepthMap, apply_mask,
                          mask_from_sparse, read_depth_png, write_depth_png)
from .geometry import (CameraIntrinsics, CameraRig, RigCamera, RigidTransform,
                       backproject, compose, default_rig, inverse,
                       load_calibration, project, save_calibration,
                       transform_point)
from .losses import (LossConfig, MetricReport, berhu_loss, combined_loss,
                     compute_metrics, mae_loss)
from .project import ProjectionResult, ProjectionStats, project_sparse, random_target_camera
from .reliable import (FilterParams, NoiseReport, ReliablePointSet, SweepResult,
                       filter_reliable, noise_rate, sweep_params)
from .scene import (Box, Scene, SceneGenConfig, generate_scene, load_scene,
                    oracle_label, render_depth, save_scene)
from .sparsify import (BernoulliConfig, MaskBank, sparsify_bernoulli,
                       sparsify_with_mask)

__version__ = "0.1.0"

__all__ = [
    "BernoulliConfig",
    "BinaryMask",
    "Box",
    "CameraIntrinsics",
    "CameraRig",
    "DenseDepthMap",
    "FilterParams",
    "LossConfig",
    "MaskBank",
    "MetricReport",
    "NoiseReport",
    "ProjectionResult",
    "ProjectionStats",
    "ReliablePointSet",
    "RigCamera",
    "RigidTransform",
    "Scene",
    "SceneGenConfig",
    "SparseDepthMap",
    "SweepResult",
    "apply_mask",
    "backproject",
    "berhu_loss",
    "combined_loss",
    "compose",
    "compute_metrics",
    "default_rig",
    "filter_reliable",
    "generate_scene",
    "inverse",
    "kernel_backend",
    "load_calibration",
    "load_scene",
    "mae_loss",
    "mask_from_sparse",
    "noise_rate",
    "oracle_label",
    "project",
    "project_sparse",
    "random_target_camera",
    "read_depth_png",
    "render_depth",
    "save_calibration",
    "save_scene",
    "sparsify_bernoulli",
    "sparsify_with_mask",
    "sweep_params",
    "transform_point",
    "write_depth_png",
]
