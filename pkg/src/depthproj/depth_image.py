"""Dense and sparse depth grids, validity masks, and depth PNG I/O.

Invalid pixels are represented by the `valid` mask, never by sentinel
values, so arithmetic on `values` stays unambiguous. Maps are immutable
after construction and safe to share across threads.

File format: 16-bit single-channel PNG where code = round(depth_m * 256)
and code 0 means invalid. This is byte-compatible with the common
depth-completion benchmark encoding, so real sparse LiDAR files can be
loaded directly (for example as mask sources).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _png
from .errors import DimensionMismatchError, FormatError, InvalidDepthError, RangeError

PROVENANCES = ("bernoulli", "masked", "projected", "real")

# Codes are 1..65535, so representable depths span [1/256, 65535/256] m and
# the quantization error of round-to-nearest is at most 1/512 m.
DEPTH_SCALE = 256.0
MAX_CODE = 65535


def _prepare_grid(values, valid):
    values = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    valid = np.ascontiguousarray(np.asarray(valid, dtype=bool))
    if values.ndim != 2:
        raise DimensionMismatchError(f"depth grid must be 2-D, got shape {values.shape}")
    if valid.shape != values.shape:
        raise DimensionMismatchError(
            f"valid mask shape {valid.shape} != values shape {values.shape}")
    chosen = values[valid]
    if chosen.size and not np.all(np.isfinite(chosen) & (chosen > 0)):
        raise InvalidDepthError("valid depth values must be finite and > 0")
    values.setflags(write=False)
    valid.setflags(write=False)
    return values, valid


@dataclass(frozen=True)
class DenseDepthMap:
    """Per-pixel metric depth with validity (sky pixels may be invalid)."""

    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        values, valid = _prepare_grid(self.values, self.valid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def valid_count(self) -> int:
        return int(self.valid.sum())

    @classmethod
    def constant(cls, width: int, height: int, depth: float) -> "DenseDepthMap":
        return cls(np.full((height, width), float(depth)), np.ones((height, width), bool))


@dataclass(frozen=True)
class SparseDepthMap:
    """Depth grid with sparse validity and a provenance tag."""

    values: np.ndarray
    valid: np.ndarray
    provenance: str

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise FormatError(
                f"unknown provenance {self.provenance!r}; expected one of {PROVENANCES}")
        values, valid = _prepare_grid(self.values, self.valid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def valid_count(self) -> int:
        return int(self.valid.sum())

    @property
    def valid_fraction(self) -> float:
        return float(self.valid.mean())

    def to_dense(self) -> DenseDepthMap:
        return DenseDepthMap(self.values, self.valid)


@dataclass(frozen=True)
class BinaryMask:
    """Per-pixel sampling pattern; dimensions must match the map it masks."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.ascontiguousarray(np.asarray(self.bits, dtype=bool))
        if bits.ndim != 2:
            raise DimensionMismatchError(f"mask must be 2-D, got shape {bits.shape}")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def popcount(self) -> int:
        return int(self.bits.sum())


def mask_from_sparse(s: SparseDepthMap) -> BinaryMask:
    """Mask that is 1 exactly where the sparse map carries a positive value."""
    return BinaryMask(s.valid & (s.values > 0))


def apply_mask(x: DenseDepthMap, m: BinaryMask) -> SparseDepthMap:
    """Keep x where the mask is set; values pass through unchanged."""
    if (m.height, m.width) != (x.height, x.width):
        raise DimensionMismatchError(
            f"mask {m.width}x{m.height} does not match map {x.width}x{x.height}")
    keep = m.bits & x.valid
    return SparseDepthMap(np.where(keep, x.values, 0.0), keep, provenance="masked")


def encode_depth(values: np.ndarray) -> np.ndarray:
    """Depth (m) to uint16 codes, round half to even.

    Depths that would round to code 0 or exceed the 16-bit range are
    rejected rather than silently dropped or clipped.
    """
    codes = np.rint(np.asarray(values, dtype=np.float64) * DEPTH_SCALE)
    if codes.size and (codes.min() < 1 or codes.max() > MAX_CODE):
        raise RangeError(
            "depth outside encodable range [1/512 m, 256 m) for the 16-bit codec")
    return codes.astype(np.uint16)


def decode_depth(codes: np.ndarray) -> np.ndarray:
    return np.asarray(codes, dtype=np.float64) / DEPTH_SCALE


def write_depth_png(m, path, compress_level: int = 6) -> None:
    """Write a dense or sparse map; invalid pixels become code 0."""
    codes = np.zeros((m.height, m.width), dtype=np.uint16)
    codes[m.valid] = encode_depth(m.values[m.valid])
    data = _png.encode_gray16(codes, compress_level)
    with open(path, "wb") as fh:
        fh.write(data)


def read_depth_png(path, provenance: str = "real") -> SparseDepthMap:
    """Read a depth PNG; pixels with code 0 are invalid."""
    with open(path, "rb") as fh:
        codes = _png.decode_gray16(fh.read())
    valid = codes > 0
    values = np.where(valid, decode_depth(codes), 0.0)
    return SparseDepthMap(values, valid, provenance=provenance)
