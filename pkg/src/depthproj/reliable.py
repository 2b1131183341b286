"""Extract reliable supervision points from noisy sparse depth.

The image is partitioned into non-overlapping square tiles (ragged at the
borders, never padded). Each tile with at least one valid point yields its
minimum depth d_m, and exactly the points within [d_m, d_m + theta] are
kept, theta being the assumed local object thickness. Points from a
farther surface that bled through an occluder sit far above the tile
minimum and are dropped.

Noise accounting follows one rule everywhere: a point is noisy when its
depth differs from ground truth by more than a tolerance (0.3 m unless
stated otherwise), and the noise rate eta is the noisy fraction of the
points that have ground truth under them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .depth_image import DenseDepthMap, SparseDepthMap
from .errors import ConfigError, DimensionMismatchError, EmptyInputError
from .scene import DEFAULT_NOISE_TOL

DEFAULT_WINDOW = 16
DEFAULT_THICKNESS = 0.5
DEFAULT_WP_GRID = (2, 4, 8, 16, 32)
DEFAULT_THETA_GRID = (0.1, 0.25, 0.5, 1.0, 2.0)
DEFAULT_MAX_DROP = 0.6
DEFAULT_SLACK = 0.05


@dataclass(frozen=True)
class FilterParams:
    window: int = DEFAULT_WINDOW
    thickness: float = DEFAULT_THICKNESS

    def __post_init__(self):
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window}")
        if self.thickness < 0:
            raise ConfigError(f"thickness must be >= 0, got {self.thickness}")


@dataclass(frozen=True)
class ReliablePointSet:
    """Filter output: kept subset plus per-tile minima diagnostics."""

    kept: SparseDepthMap
    dropped_count: int
    input_count: int
    window_min: np.ndarray  # (tiles_y, tiles_x), NaN for empty tiles
    params: FilterParams

    @property
    def dropped_fraction(self) -> float:
        if self.input_count == 0:
            return 0.0
        return self.dropped_count / self.input_count


@dataclass(frozen=True)
class NoiseReport:
    eta: float
    evaluated_count: int
    dropped_fraction: float
    tol: float

    def as_dict(self) -> dict:
        return {
            "eta": self.eta,
            "evaluated_count": self.evaluated_count,
            "dropped_fraction": self.dropped_fraction,
            "tol": self.tol,
        }


def filter_reliable(s: SparseDepthMap, params: FilterParams = FilterParams()) -> ReliablePointSet:
    """Tiled minimum pooling plus thickness band; see module docstring."""
    wp = params.window
    tmin = np.asarray(_kernels.tile_min(
        np.ascontiguousarray(s.values),
        np.ascontiguousarray(s.valid).view(np.uint8),
        wp,
    ))
    band_hi = tmin + params.thickness
    per_pixel_hi = np.repeat(np.repeat(band_hi, wp, axis=0), wp, axis=1)[:s.height, :s.width]
    keep = s.valid & (s.values <= per_pixel_hi)
    kept = SparseDepthMap(np.where(keep, s.values, 0.0), keep, provenance=s.provenance)
    window_min = np.where(np.isinf(tmin), np.nan, tmin)
    n_in = s.valid_count
    return ReliablePointSet(
        kept=kept,
        dropped_count=n_in - kept.valid_count,
        input_count=n_in,
        window_min=window_min,
        params=params,
    )


def noise_rate(s, truth: DenseDepthMap, tol: float = DEFAULT_NOISE_TOL) -> NoiseReport:
    """Noise rate over points with ground truth coverage.

    Accepts a SparseDepthMap or a ReliablePointSet; for the latter the
    report also carries the filter's dropped fraction. Points without
    ground truth are excluded from the evaluated count. Raises
    EmptyInputError when nothing can be evaluated.
    """
    dropped_fraction = 0.0
    if isinstance(s, ReliablePointSet):
        dropped_fraction = s.dropped_fraction
        s = s.kept
    if (s.height, s.width) != (truth.height, truth.width):
        raise DimensionMismatchError("map and truth dimensions differ")
    both = s.valid & truth.valid
    evaluated = int(both.sum())
    if evaluated == 0:
        raise EmptyInputError("noise rate undefined: no points with ground truth")
    noisy = int((both & (np.abs(s.values - truth.values) > tol)).sum())
    return NoiseReport(eta=noisy / evaluated, evaluated_count=evaluated,
                       dropped_fraction=dropped_fraction, tol=tol)


@dataclass(frozen=True)
class SweepPoint:
    value: float
    mean_eta: float
    mean_dropped: float


@dataclass(frozen=True)
class SweepResult:
    params: FilterParams
    window_curve: tuple
    thickness_curve: tuple
    notes: tuple

    def curves_dict(self) -> dict:
        return {
            "window": [(p.value, p.mean_eta, p.mean_dropped) for p in self.window_curve],
            "thickness": [(p.value, p.mean_eta, p.mean_dropped) for p in self.thickness_curve],
        }


def _mean_curve(corpus, params_of, grid, tol):
    points = []
    for value in grid:
        etas, drops = [], []
        for sparse, truth in corpus:
            rps = filter_reliable(sparse, params_of(value))
            report = noise_rate(rps, truth, tol)
            etas.append(report.eta)
            drops.append(report.dropped_fraction)
        points.append(SweepPoint(value=float(value),
                                 mean_eta=float(np.mean(etas)),
                                 mean_dropped=float(np.mean(drops))))
    return points


def sweep_params(corpus, window_grid=DEFAULT_WP_GRID, thickness_grid=DEFAULT_THETA_GRID,
                 tol: float = DEFAULT_NOISE_TOL, max_drop: float = DEFAULT_MAX_DROP,
                 slack: float = DEFAULT_SLACK,
                 stage1_thickness: float = DEFAULT_THICKNESS) -> SweepResult:
    """Two-stage hyperparameter selection from noise rates alone.

    Stage 1 fixes the thickness at `stage1_thickness` and picks the window
    minimizing mean eta among windows whose mean dropped fraction stays
    under `max_drop` (ties favor retention). Stage 2 fixes that window and
    picks the largest thickness whose mean eta is within (1 + slack) of the
    grid minimum, again favoring retention among near-equal noise rates.

    `corpus` is a sequence of (sparse_map, truth_map) pairs.
    """
    corpus = list(corpus)
    window_grid = list(window_grid)
    thickness_grid = list(thickness_grid)
    if not corpus:
        raise ConfigError("sweep needs a non-empty corpus")
    if not window_grid or not thickness_grid:
        raise ConfigError("sweep needs non-empty parameter grids")

    notes = []
    wcurve = _mean_curve(corpus, lambda w: FilterParams(int(w), stage1_thickness),
                         window_grid, tol)
    eligible = [p for p in wcurve if p.mean_dropped <= max_drop]
    if not eligible:
        notes.append("retention floor unsatisfied by every window; ignoring it")
        eligible = list(wcurve)
    if all(p.mean_eta == 0.0 for p in wcurve):
        notes.append("degenerate: noise-free")
        best_w = max(eligible, key=lambda p: p.value)
    else:
        min_eta = min(p.mean_eta for p in eligible)
        best_w = min((p for p in eligible if p.mean_eta == min_eta),
                     key=lambda p: p.mean_dropped)
    window = int(best_w.value)

    tcurve = _mean_curve(corpus, lambda t: FilterParams(window, float(t)),
                         thickness_grid, tol)
    min_eta_t = min(p.mean_eta for p in tcurve)
    threshold = (1.0 + slack) * min_eta_t
    best_t = max((p for p in tcurve if p.mean_eta <= threshold), key=lambda p: p.value)

    return SweepResult(
        params=FilterParams(window, float(best_t.value)),
        window_curve=tuple(wcurve),
        thickness_curve=tuple(tcurve),
        notes=tuple(notes),
    )
