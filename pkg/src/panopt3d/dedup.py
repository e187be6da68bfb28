"""Greedy confidence-ranked deduplication of center candidates.

Candidates are visited in order of descending confidence (ties broken by
ascending input index). Each still-unsuppressed candidate is kept and
suppresses every lower-ranked candidate strictly closer than ``d``. The kept
set therefore satisfies: all pairwise distances >= d, and every suppressed
candidate lies within d of a kept candidate of equal or higher rank.

Two implementations share one distance predicate and are exactly
interchangeable: a literal quadratic reference (``dedup_centers_bruteforce``)
and a uniform-spatial-hash version (``dedup_centers_grid``) whose 3x3x3
neighborhood scan makes the pass near-linear for bounded densities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, ClusterMixin

from ._hashgrid import build_cell_index, find_group
from .validation import check_confidence, check_coords

__all__ = ["KeptCenters", "dedup_centers_bruteforce", "dedup_centers_grid",
           "ranked_order", "CenterDedup"]


@dataclass(frozen=True)
class KeptCenters:
    """Deduplicated centers, in the keep order (descending confidence)."""

    indices: np.ndarray   # (K,) int64 indices into the candidate arrays
    coords: np.ndarray    # (K, 3) float64

    def __len__(self) -> int:
        return self.indices.shape[0]


def ranked_order(confidence: np.ndarray) -> np.ndarray:
    """Candidate ranks: descending confidence, ties by ascending index."""
    return np.argsort(-np.asarray(confidence, dtype=np.float64), kind="stable")


def _check_d(d: float) -> float:
    d = float(d)
    if not (np.isfinite(d) and d > 0.0):
        raise ValueError(f"dedup distance d must be positive and finite, got {d}")
    return d


def dedup_centers_bruteforce(coords, confidence, d: float) -> KeptCenters:
    """Quadratic reference implementation of the greedy suppression pass."""
    coords = check_coords(coords)
    confidence = check_confidence(confidence, coords.shape[0])
    d = _check_d(d)

    order = ranked_order(confidence)
    pos = coords[order]
    dd = d * d
    m = pos.shape[0]
    rejected = np.zeros(m, dtype=bool)
    kept_ranks = []
    for k in range(m):
        if rejected[k]:
            continue
        kept_ranks.append(k)
        dx = pos[k + 1:, 0] - pos[k, 0]
        dy = pos[k + 1:, 1] - pos[k, 1]
        dz = pos[k + 1:, 2] - pos[k, 2]
        rejected[k + 1:] |= dx * dx + dy * dy + dz * dz < dd

    indices = order[np.array(kept_ranks, dtype=np.int64)] if kept_ranks else np.empty(0, np.int64)
    return KeptCenters(indices=indices, coords=coords[indices])


@njit(cache=True)
def _grid_suppress(pos, cells, sizes, uniq_keys, starts, items, dd):
    """Greedy pass over rank-ordered candidates using the cell index.

    All arrays are in rank space: ``pos[k]`` is the k-th best candidate and
    ``items`` holds rank indices grouped by cell. Returns kept ranks.
    """
    m = pos.shape[0]
    sy = sizes[1]
    sz = sizes[2]
    rejected = np.zeros(m, dtype=np.bool_)
    kept = np.empty(m, dtype=np.int64)
    n_kept = 0
    for k in range(m):
        if rejected[k]:
            continue
        kept[n_kept] = k
        n_kept += 1
        cx = cells[k, 0]
        cy = cells[k, 1]
        cz = cells[k, 2]
        for ox in range(-1, 2):
            for oy in range(-1, 2):
                for oz in range(-1, 2):
                    key = ((cx + ox) * sy + (cy + oy)) * sz + (cz + oz)
                    g = find_group(uniq_keys, key)
                    if g < 0:
                        continue
                    for t in range(starts[g], starts[g + 1]):
                        h = items[t]
                        if h > k and not rejected[h]:
                            dx = pos[h, 0] - pos[k, 0]
                            dy = pos[h, 1] - pos[k, 1]
                            dz = pos[h, 2] - pos[k, 2]
                            if dx * dx + dy * dy + dz * dz < dd:
                                rejected[h] = True
    return kept[:n_kept]


def dedup_centers_grid(coords, confidence, d: float) -> KeptCenters:
    """Spatial-hash implementation; output is identical to the brute force."""
    coords = check_coords(coords)
    confidence = check_confidence(confidence, coords.shape[0])
    d = _check_d(d)

    order = ranked_order(confidence)
    pos = np.ascontiguousarray(coords[order])
    index = build_cell_index(pos, d)
    kept_ranks = _grid_suppress(pos, index.cells, index.sizes, index.uniq_keys,
                                index.starts, index.items, d * d)
    indices = order[kept_ranks]
    return KeptCenters(indices=indices, coords=coords[indices])


class CenterDedup(BaseEstimator, ClusterMixin):
    """Scikit-learn style estimator around the greedy deduplication pass.

    Candidate confidences are passed as ``sample_weight``; omitted weights
    rank candidates by input order. After ``fit``, ``labels_`` assigns every
    candidate to its nearest kept center.

    Parameters
    ----------
    d : float, minimum separation kept between centers.
    method : "grid" (spatial hash) or "bruteforce" (quadratic reference).
    """

    def __init__(self, d: float = 0.8, method: str = "grid"):
        self.d = d
        self.method = method

    def fit(self, X, y=None, sample_weight=None):
        X = check_coords(X, name="X")
        if sample_weight is None:
            # degrade to input-order ranking via strictly decreasing weights
            n = X.shape[0]
            sample_weight = np.linspace(1.0, 0.5, num=n) if n else np.empty(0)
        if self.method == "grid":
            kept = dedup_centers_grid(X, sample_weight, self.d)
        elif self.method == "bruteforce":
            kept = dedup_centers_bruteforce(X, sample_weight, self.d)
        else:
            raise ValueError(f"method must be 'grid' or 'bruteforce', got {self.method!r}")
        self.kept_ = kept
        self.kept_indices_ = kept.indices
        self.cluster_centers_ = kept.coords
        if len(kept) and X.shape[0]:
            from .pipeline import assign_to_centers
            self.labels_ = assign_to_centers(X, kept)
        else:
            self.labels_ = np.full(X.shape[0], -1, dtype=np.int64)
        return self

    def fit_predict(self, X, y=None, sample_weight=None):
        return self.fit(X, sample_weight=sample_weight).labels_
