"""Supervision targets and loss formulas for center-offset training.

The regression target of every things point is the axis-aligned bounding-box
midpoint of its instance, so the learned "center" need not coincide with any
scanned surface point. Confidence targets decay with the offset regression
error through a Gaussian kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .data import PanopticLabels, PointCloud
from .taxonomy import ClassTaxonomy
from .validation import check_offsets

__all__ = [
    "instance_centers", "offset_targets", "OffsetTargets",
    "offset_loss", "OffsetLossResult",
    "confidence_targets", "wbce_loss", "total_loss",
    "mean_offset_error", "MeanOffsetError",
    "CONFIDENCE_WEIGHT", "LOSS_WEIGHTS", "CONF_EPS",
]

# positive-term weight inside the weighted BCE
CONFIDENCE_WEIGHT = 6.0
# combination weights for (wce, ls, tc, offset, wbce)
LOSS_WEIGHTS = (1.0, 3.0, 1.0, 2.0, 1.0)
# clamp for log arguments inside the weighted BCE
CONF_EPS = 1e-7


def instance_centers(cloud: PointCloud, labels: PanopticLabels,
                     taxonomy: ClassTaxonomy) -> dict[int, np.ndarray]:
    """Axis-aligned bounding-box midpoint of every things instance.

    Returns a mapping from instance id to a (3,) float64 center,
    ``(min + max) / 2`` per axis over the instance's points. Only things-class
    points with a positive instance id contribute.
    """
    sem = labels.semantic
    inst = labels.instance
    things = taxonomy.things_mask(sem, strict=False)
    eligible = things & (inst > 0)
    centers: dict[int, np.ndarray] = {}
    for iid in np.unique(inst[eligible]):
        pts = cloud.coords[eligible & (inst == iid)]
        centers[int(iid)] = (pts.min(axis=0) + pts.max(axis=0)) / 2.0
    return centers


@dataclass(frozen=True)
class OffsetTargets:
    """Ground-truth offset vectors plus the mask of supervised points."""

    targets: np.ndarray       # (N, 3) float64; zero rows off the mask
    things_mask: np.ndarray   # (N,) bool
    centers: dict[int, np.ndarray]


def offset_targets(cloud: PointCloud, labels: PanopticLabels,
                   taxonomy: ClassTaxonomy) -> OffsetTargets:
    """Per-point regression targets: instance center minus point coordinate.

    Things points with a positive instance id get ``center - p``; all other
    points get an exact zero vector and are excluded from the mask.
    """
    centers = instance_centers(cloud, labels, taxonomy)
    sem = labels.semantic
    inst = labels.instance
    mask = taxonomy.things_mask(sem, strict=False) & (inst > 0)
    targets = np.zeros((len(cloud), 3), dtype=np.float64)
    for iid, center in centers.items():
        rows = mask & (inst == iid)
        targets[rows] = center - cloud.coords[rows]
    return OffsetTargets(targets=targets, things_mask=mask, centers=centers)


class OffsetLossResult(NamedTuple):
    total: float              # sum of per-point norms / number of things points
    per_point: np.ndarray     # (N,) float64; zero off the mask
    degenerate: bool          # True when no things points exist


def offset_loss(pred_offsets, targets: OffsetTargets) -> OffsetLossResult:
    """L2-norm offset regression loss, averaged over things points only."""
    pred = check_offsets(pred_offsets, targets.targets.shape[0], name="pred_offsets")
    mask = targets.things_mask
    per_point = np.zeros(pred.shape[0], dtype=np.float64)
    per_point[mask] = np.linalg.norm(pred[mask] - targets.targets[mask], axis=1)
    n_things = int(mask.sum())
    if n_things == 0:
        return OffsetLossResult(total=0.0, per_point=per_point, degenerate=True)
    return OffsetLossResult(total=float(per_point.sum() / n_things),
                            per_point=per_point, degenerate=False)


def confidence_targets(per_point_offset_loss, things_mask, sigma: float = 1.0) -> np.ndarray:
    """Gaussian-kernel confidence target: exp(-L^2 / (2 sigma^2)) on things.

    Zero error maps to confidence 1; non-things points get confidence 0.
    """
    sigma = float(sigma)
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    loss = np.asarray(per_point_offset_loss, dtype=np.float64)
    mask = np.asarray(things_mask, dtype=bool)
    if loss.shape != mask.shape:
        raise ValueError("per_point_offset_loss and things_mask must have equal shape")
    out = np.zeros_like(loss)
    out[mask] = np.exp(-np.square(loss[mask]) / (2.0 * sigma * sigma))
    return out


def wbce_loss(pred_confidence, gt_confidence) -> float:
    """Weighted binary cross-entropy between predicted and target confidence.

    The positive term is up-weighted by ``CONFIDENCE_WEIGHT``; predicted
    confidences are clamped to [CONF_EPS, 1 - CONF_EPS] before the logs.
    """
    pred = np.asarray(pred_confidence, dtype=np.float64)
    gt = np.asarray(gt_confidence, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 1:
        raise ValueError("pred and gt confidence must be equal-length vectors")
    if pred.size == 0:
        raise ValueError("wbce_loss is undefined for zero points")
    p = np.clip(pred, CONF_EPS, 1.0 - CONF_EPS)
    terms = CONFIDENCE_WEIGHT * gt * np.log(p) + (1.0 - gt) * np.log(1.0 - p)
    return float(-terms.sum() / pred.size)


def total_loss(wce: float, ls: float, tc: float, offset: float, wbce: float) -> float:
    """Weighted sum of the five training loss terms.

    ``total = wce + 3*ls + tc + 2*offset + wbce``. The semantic terms (wce,
    Lovasz, total-variation consistency) are produced by the network training
    stack and enter here as plain scalars.
    """
    w = LOSS_WEIGHTS
    return float(w[0] * wce + w[1] * ls + w[2] * tc + w[3] * offset + w[4] * wbce)


class MeanOffsetError(NamedTuple):
    value: float
    degenerate: bool


def mean_offset_error(pred_offsets, targets: OffsetTargets) -> MeanOffsetError:
    """Mean Euclidean offset error over things points (reporting metric)."""
    pred = check_offsets(pred_offsets, targets.targets.shape[0], name="pred_offsets")
    mask = targets.things_mask
    if not mask.any():
        return MeanOffsetError(value=0.0, degenerate=True)
    errs = np.linalg.norm(pred[mask] - targets.targets[mask], axis=1)
    return MeanOffsetError(value=float(errs.mean()), degenerate=False)
