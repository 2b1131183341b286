"""Exception hierarchy.

Everything raised on purpose by this package derives from DepthProjError so
callers can catch broadly; most classes also subclass ValueError because they
signal bad values or bad files rather than programming errors.
"""


class DepthProjError(Exception):
    """Base class for all errors raised by depthproj."""


class ConfigError(DepthProjError, ValueError):
    """Invalid configuration, calibration or command-line input."""


class FormatError(ConfigError):
    """A file (PNG, scene, calibration, manifest) is malformed."""


class DimensionMismatchError(DepthProjError, ValueError):
    """Two grids that must share dimensions do not."""


class InvalidDepthError(DepthProjError, ValueError):
    """A depth value is non-positive or non-finite where that is not allowed."""


class OutOfBoundsError(DepthProjError, ValueError):
    """A pixel coordinate lies outside the image grid."""


class BehindCameraError(DepthProjError, ValueError):
    """A 3D point has z <= 0 and cannot be projected."""


class RangeError(DepthProjError, ValueError):
    """A depth value falls outside the encodable range of the PNG codec."""


class CoverageError(DepthProjError, ValueError):
    """Ground truth is missing under a point that must be evaluated."""


class EmptyInputError(DepthProjError, ValueError):
    """An operation needs at least one point and got none."""


class SceneError(DepthProjError, ValueError):
    """A scene violates its geometric invariants."""


class StageError(DepthProjError, RuntimeError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, scene_index: int, cause: BaseException):
        super().__init__(f"stage '{stage}' failed on scene {scene_index}: {cause}")
        self.stage = stage
        self.scene_index = scene_index
        self.cause = cause
