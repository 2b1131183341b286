"""Turn dense depth into sparse depth.

Two samplers: an i.i.d. Bernoulli keep/drop per pixel, and transfer of a
real sensor's validity pattern from a bank of binary masks. Sparsification
never modifies values, it only drops pixels; a masked pixel that is invalid
in the dense map stays invalid (a return cannot exist without a surface).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .depth_image import (BinaryMask, DenseDepthMap, SparseDepthMap, apply_mask,
                          mask_from_sparse, read_depth_png)
from .errors import ConfigError, DimensionMismatchError, EmptyInputError


@dataclass(frozen=True)
class BernoulliConfig:
    keep_probability: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.keep_probability <= 1):
            raise ConfigError(
                f"keep probability must be in (0, 1], got {self.keep_probability}")


def sparsify_bernoulli(x: DenseDepthMap, cfg: BernoulliConfig) -> SparseDepthMap:
    """Keep each valid pixel independently with the configured probability."""
    rng = np.random.default_rng(cfg.seed)
    draw = rng.random((x.height, x.width))
    keep = x.valid & (draw < cfg.keep_probability)
    return SparseDepthMap(np.where(keep, x.values, 0.0), keep, provenance="bernoulli")


@dataclass(frozen=True)
class MaskBank:
    """Immutable bank of sampling masks sharing one target size.

    Draws are a pure function of (bank seed, draw index), so a bank can be
    shared across threads and a pipeline can reproduce any draw from its
    recorded index.
    """

    masks: tuple
    seed: int = 0

    def __post_init__(self):
        masks = tuple(self.masks)
        if not masks:
            raise EmptyInputError("mask bank is empty")
        w, h = masks[0].width, masks[0].height
        for m in masks:
            if (m.width, m.height) != (w, h):
                raise DimensionMismatchError("all masks in a bank must share dimensions")
        object.__setattr__(self, "masks", masks)

    @property
    def width(self) -> int:
        return self.masks[0].width

    @property
    def height(self) -> int:
        return self.masks[0].height

    def __len__(self) -> int:
        return len(self.masks)

    def pick(self, draw_index: int = 0):
        """Uniformly pick a mask; returns (mask, mask_id)."""
        rng = np.random.default_rng((self.seed, draw_index))
        idx = int(rng.integers(len(self.masks)))
        return self.masks[idx], idx

    @classmethod
    def from_dir(cls, directory, seed: int = 0) -> "MaskBank":
        """Load every *.png in a directory as a mask (values discarded)."""
        paths = sorted(Path(directory).glob("*.png"))
        if not paths:
            raise ConfigError(f"no .png mask files found in {directory}")
        masks = tuple(mask_from_sparse(read_depth_png(p)) for p in paths)
        return cls(masks=masks, seed=seed)


def sparsify_with_mask(x: DenseDepthMap, bank: MaskBank, draw_index: int = 0):
    """Apply a randomly drawn mask from the bank; returns (sparse, mask_id)."""
    if (bank.width, bank.height) != (x.width, x.height):
        raise DimensionMismatchError(
            f"bank masks are {bank.width}x{bank.height}, map is {x.width}x{x.height}")
    mask, idx = bank.pick(draw_index)
    return apply_mask(x, mask), idx


def scanline_mask(width: int, height: int, row_step: int = 4, col_step: int = 4,
                  row_phase: int = 0, col_phase: int = 0) -> BinaryMask:
    """Regular scanline sampling pattern (sensor-like rows of returns)."""
    if row_step < 1 or col_step < 1:
        raise ConfigError("scanline steps must be >= 1")
    bits = np.zeros((height, width), dtype=bool)
    bits[row_phase % row_step::row_step, col_phase % col_step::col_step] = True
    return BinaryMask(bits)
