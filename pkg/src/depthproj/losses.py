"""Scalar evaluation losses and benchmark metrics.

These are pure evaluation functions, no gradients: they exist to make the
training objective and the benchmark numbers testable and reusable.

The synthetic-domain loss is the Reverse Huber (BerHu): absolute error up
to a threshold c, then (e^2 + c^2) / (2c) above it, with c set per image
to a fraction (default 0.2) of the maximum absolute error. The two
branches agree exactly at |e| = c, so the loss is continuous. The
real-domain loss is a plain mean absolute error over a reliable point set,
which weighs all residuals equally and is therefore more robust to
surviving outliers. The combined objective is a weighted sum of the two.

Metrics are RMSE and MAE in millimeters plus their inverse-depth
counterparts iRMSE and iMAE in 1/km, evaluated at full resolution over
pixels that have ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .depth_image import DenseDepthMap
from .errors import ConfigError, EmptyInputError
from .reliable import ReliablePointSet

MM_PER_M = 1000.0
# 1 m^-1 = 1000 km^-1; cross-checked by scripts/unit_check.py from SI
# definitions alone.
INV_KM_PER_INV_M = 1000.0


@dataclass(frozen=True)
class LossConfig:
    """Loss weights and batch composition.

    The defaults are the second training step (both domains active with
    batch halves of two images each); `step_one` is the synthetic-only
    warm-up.
    """

    lambda_syn: float = 1.0
    lambda_real: float = 1.0
    berhu_c_fraction: float = 0.2
    batch_syn: int = 2
    batch_real: int = 2

    def __post_init__(self):
        if self.lambda_syn < 0 or self.lambda_real < 0:
            raise ConfigError("loss weights must be non-negative")
        if not (0 < self.berhu_c_fraction < 1):
            raise ConfigError("berhu_c_fraction must be in (0, 1)")
        if self.batch_syn < 0 or self.batch_real < 0:
            raise ConfigError("batch sizes must be non-negative")
        if self.batch_syn == 0 and self.batch_real == 0:
            raise ConfigError("at least one batch size must be positive")

    @classmethod
    def step_one(cls) -> "LossConfig":
        return cls(lambda_syn=1.0, lambda_real=0.0, batch_syn=4, batch_real=0)

    @classmethod
    def step_two(cls) -> "LossConfig":
        return cls(lambda_syn=1.0, lambda_real=1.0, batch_syn=2, batch_real=2)


def _residuals(pred: DenseDepthMap, target) -> np.ndarray:
    if (pred.height, pred.width) != (target.height, target.width):
        raise ConfigError("prediction and target dimensions differ")
    support = pred.valid & target.valid
    if not support.any():
        raise EmptyInputError("no valid target points to evaluate")
    return pred.values[support] - target.values[support]


def berhu_loss(pred: DenseDepthMap, target, cfg: LossConfig = LossConfig()) -> float:
    """Per-image Reverse Huber loss, meters scale.

    A perfect prediction has max residual 0, hence c = 0; the loss is 0 by
    convention in that case.
    """
    r = _residuals(pred, target)
    return float(berhu_of_residuals(r, cfg.berhu_c_fraction))


def berhu_of_residuals(residuals: np.ndarray, c_fraction: float = 0.2) -> float:
    """BerHu mean over raw residuals (exposed for direct checking)."""
    r = np.abs(np.asarray(residuals, dtype=np.float64))
    if r.size == 0:
        raise EmptyInputError("no residuals")
    c = c_fraction * float(r.max())
    if c == 0.0:
        return 0.0
    per_point = np.where(r <= c, r, (r * r + c * c) / (2.0 * c))
    return float(per_point.mean())


def mae_loss(pred: DenseDepthMap, points) -> float:
    """Mean absolute error over a reliable point set (or any sparse map)."""
    target = points.kept if isinstance(points, ReliablePointSet) else points
    r = _residuals(pred, target)
    return float(np.abs(r).mean())


def berhu_batch(preds, targets, cfg: LossConfig = LossConfig()) -> float:
    """Mean of per-image BerHu losses over a batch."""
    pairs = list(zip(preds, targets, strict=True))
    if not pairs:
        raise EmptyInputError("empty batch")
    return float(np.mean([berhu_loss(p, t, cfg) for p, t in pairs]))


def mae_batch(preds, point_sets) -> float:
    pairs = list(zip(preds, point_sets, strict=True))
    if not pairs:
        raise EmptyInputError("empty batch")
    return float(np.mean([mae_loss(p, s) for p, s in pairs]))


def combined_loss(syn_term: float, real_term: float,
                  cfg: LossConfig = LossConfig()) -> float:
    """Weighted total objective, linear in each term."""
    if not (np.isfinite(syn_term) and np.isfinite(real_term)):
        raise ConfigError("loss terms must be finite")
    return cfg.lambda_syn * syn_term + cfg.lambda_real * real_term


@dataclass(frozen=True)
class MetricReport:
    rmse_mm: float
    mae_mm: float
    irmse_per_km: float
    imae_per_km: float
    evaluated_count: int
    inverse_excluded: int

    def as_dict(self) -> dict:
        return {
            "rmse_mm": self.rmse_mm,
            "mae_mm": self.mae_mm,
            "irmse_per_km": self.irmse_per_km,
            "imae_per_km": self.imae_per_km,
            "evaluated_count": self.evaluated_count,
            "inverse_excluded": self.inverse_excluded,
        }


def compute_metrics(pred: DenseDepthMap, gt) -> MetricReport:
    """RMSE/MAE in mm and iRMSE/iMAE in 1/km over pixels with ground truth.

    Pixels whose depth is non-positive on either side cannot enter the
    inverse metrics; they are excluded from those two numbers only and
    counted in `inverse_excluded`. (They cannot occur for maps built
    through this package, whose valid depths are always positive.)
    """
    if (pred.height, pred.width) != (gt.height, gt.width):
        raise ConfigError("prediction and ground truth dimensions differ")
    support = pred.valid & gt.valid
    n = int(support.sum())
    if n == 0:
        raise EmptyInputError("no ground truth points to evaluate")
    p = pred.values[support]
    g = gt.values[support]
    diff_mm = (p - g) * MM_PER_M
    rmse = float(np.sqrt(np.mean(diff_mm ** 2)))
    mae = float(np.mean(np.abs(diff_mm)))

    invertible = (p > 0) & (g > 0)
    excluded = n - int(invertible.sum())
    if int(invertible.sum()) == 0:
        raise EmptyInputError("no points usable for inverse metrics")
    idiff = (INV_KM_PER_INV_M / p[invertible]) - (INV_KM_PER_INV_M / g[invertible])
    irmse = float(np.sqrt(np.mean(idiff ** 2)))
    imae = float(np.mean(np.abs(idiff)))
    return MetricReport(rmse_mm=rmse, mae_mm=mae, irmse_per_km=irmse,
                        imae_per_km=imae, evaluated_count=n, inverse_excluded=excluded)
