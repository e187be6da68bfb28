"""Benchmark baselines: density clustering and flat-kernel mean shift.

Both run on the same uniform spatial hash as the deduplication pass, so their
wall-clock numbers are an apples-to-apples comparison of algorithmic cost
rather than implementation technology.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, ClusterMixin

from ._hashgrid import build_cell_index, cell_key_of, find_group
from .dedup import dedup_centers_grid
from .validation import check_coords

__all__ = ["dbscan", "meanshift", "DBSCANBaseline", "MeanShiftBaseline"]


# --------------------------------------------------------------------------
# DBSCAN
# --------------------------------------------------------------------------

@njit(cache=True)
def _dbscan_kernel(pts, cells, sizes, uniq_keys, starts, items, ee, min_pts):
    m = pts.shape[0]
    sy = sizes[1]
    sz = sizes[2]

    # pass 1: core points have >= min_pts neighbors within eps (self included)
    core = np.zeros(m, dtype=np.bool_)
    for i in range(m):
        count = 0
        for ox in range(-1, 2):
            for oy in range(-1, 2):
                for oz in range(-1, 2):
                    key = ((cells[i, 0] + ox) * sy + (cells[i, 1] + oy)) * sz + (cells[i, 2] + oz)
                    g = find_group(uniq_keys, key)
                    if g < 0:
                        continue
                    for t in range(starts[g], starts[g + 1]):
                        j = items[t]
                        dx = pts[j, 0] - pts[i, 0]
                        dy = pts[j, 1] - pts[i, 1]
                        dz = pts[j, 2] - pts[i, 2]
                        if dx * dx + dy * dy + dz * dz <= ee:
                            count += 1
        core[i] = count >= min_pts

    # pass 2: expand clusters from core points in ascending index order
    labels = np.full(m, -1, dtype=np.int64)
    stack = np.empty(m, dtype=np.int64)
    cid = 0
    for seed in range(m):
        if labels[seed] != -1 or not core[seed]:
            continue
        labels[seed] = cid
        stack[0] = seed
        top = 1
        while top > 0:
            top -= 1
            p = stack[top]
            for ox in range(-1, 2):
                for oy in range(-1, 2):
                    for oz in range(-1, 2):
                        key = ((cells[p, 0] + ox) * sy + (cells[p, 1] + oy)) * sz + (cells[p, 2] + oz)
                        g = find_group(uniq_keys, key)
                        if g < 0:
                            continue
                        for t in range(starts[g], starts[g + 1]):
                            q = items[t]
                            if labels[q] != -1:
                                continue
                            dx = pts[q, 0] - pts[p, 0]
                            dy = pts[q, 1] - pts[p, 1]
                            dz = pts[q, 2] - pts[p, 2]
                            if dx * dx + dy * dy + dz * dz <= ee:
                                labels[q] = cid
                                if core[q]:
                                    stack[top] = q
                                    top += 1
        cid += 1
    return labels


def dbscan(points, eps: float, min_pts: int) -> np.ndarray:
    """Density clustering; returns per-point cluster ids with -1 for noise.

    A point is core when at least ``min_pts`` points (itself included) lie
    within ``eps``. Clusters are expanded from core points in ascending index
    order, so the labeling is deterministic.
    """
    points = check_coords(points, name="points")
    eps = float(eps)
    if not (np.isfinite(eps) and eps > 0.0):
        raise ValueError(f"eps must be positive, got {eps}")
    if min_pts < 1:
        raise ValueError(f"min_pts must be >= 1, got {min_pts}")
    if points.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    pts = np.ascontiguousarray(points)
    index = build_cell_index(pts, eps)
    return _dbscan_kernel(pts, index.cells, index.sizes, index.uniq_keys,
                          index.starts, index.items, eps * eps, int(min_pts))


# --------------------------------------------------------------------------
# Flat-kernel mean shift
# --------------------------------------------------------------------------

@njit(cache=True)
def _meanshift_kernel(pts, sizes, uniq_keys, starts, items, origin, edge,
                      bb, tol2, max_iters, y):
    """Iterate every seed to its mode; returns per-seed neighbor support."""
    m = y.shape[0]
    sy = sizes[1]
    sz = sizes[2]
    active = np.ones(m, dtype=np.bool_)
    for _ in range(max_iters):
        moved_any = False
        for i in range(m):
            if not active[i]:
                continue
            cx, cy, cz = cell_key_of(y[i, 0], y[i, 1], y[i, 2], edge, origin, sizes)
            sx = 0.0
            sy_acc = 0.0
            sz_acc = 0.0
            n = 0
            for ox in range(-1, 2):
                for oy in range(-1, 2):
                    for oz in range(-1, 2):
                        key = ((cx + ox) * sy + (cy + oy)) * sz + (cz + oz)
                        g = find_group(uniq_keys, key)
                        if g < 0:
                            continue
                        for t in range(starts[g], starts[g + 1]):
                            j = items[t]
                            dx = pts[j, 0] - y[i, 0]
                            dy = pts[j, 1] - y[i, 1]
                            dz = pts[j, 2] - y[i, 2]
                            if dx * dx + dy * dy + dz * dz <= bb:
                                sx += pts[j, 0]
                                sy_acc += pts[j, 1]
                                sz_acc += pts[j, 2]
                                n += 1
            if n == 0:
                active[i] = False
                continue
            nx = sx / n
            ny = sy_acc / n
            nz = sz_acc / n
            dx = nx - y[i, 0]
            dy = ny - y[i, 1]
            dz = nz - y[i, 2]
            y[i, 0] = nx
            y[i, 1] = ny
            y[i, 2] = nz
            if dx * dx + dy * dy + dz * dz < tol2:
                active[i] = False
            else:
                moved_any = True
        if not moved_any:
            break

    support = np.zeros(m, dtype=np.int64)
    for i in range(m):
        cx, cy, cz = cell_key_of(y[i, 0], y[i, 1], y[i, 2], edge, origin, sizes)
        n = 0
        for ox in range(-1, 2):
            for oy in range(-1, 2):
                for oz in range(-1, 2):
                    key = ((cx + ox) * sy + (cy + oy)) * sz + (cz + oz)
                    g = find_group(uniq_keys, key)
                    if g < 0:
                        continue
                    for t in range(starts[g], starts[g + 1]):
                        j = items[t]
                        dx = pts[j, 0] - y[i, 0]
                        dy = pts[j, 1] - y[i, 1]
                        dz = pts[j, 2] - y[i, 2]
                        if dx * dx + dy * dy + dz * dz <= bb:
                            n += 1
        support[i] = n
    return support


def meanshift(points, bandwidth: float, max_iters: int = 100,
              tol: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Flat-kernel mean shift over all points as seeds.

    Each seed repeatedly moves to the mean of the original points within
    ``bandwidth`` of it, until the shift norm drops below ``tol`` or
    ``max_iters`` is reached. Converged modes closer than ``bandwidth / 2``
    are merged (higher-support mode wins); every point is assigned to the
    kept mode nearest its own converged position.

    Returns ``(labels, centers)`` with labels in ``0..K-1``.
    """
    points = check_coords(points, name="points")
    bandwidth = float(bandwidth)
    if not (np.isfinite(bandwidth) and bandwidth > 0.0):
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if points.shape[0] == 0:
        return np.empty(0, dtype=np.int64), np.empty((0, 3), dtype=np.float64)

    pts = np.ascontiguousarray(points)
    index = build_cell_index(pts, bandwidth)
    modes = pts.copy()
    support = _meanshift_kernel(pts, index.sizes, index.uniq_keys, index.starts,
                                index.items, index.origin, index.edge,
                                bandwidth * bandwidth, float(tol) ** 2,
                                int(max_iters), modes)

    # merge near-duplicate modes: greedy suppression ranked by support
    conf = support.astype(np.float64) / max(int(support.max()), 1)
    kept = dedup_centers_grid(modes, conf, bandwidth / 2.0)

    from .pipeline import assign_to_centers
    labels = assign_to_centers(modes, kept)
    return labels, kept.coords


# --------------------------------------------------------------------------
# estimator wrappers
# --------------------------------------------------------------------------

class DBSCANBaseline(BaseEstimator, ClusterMixin):
    """Estimator wrapper around :func:`dbscan` (labels_ uses -1 for noise)."""

    def __init__(self, eps: float = 0.8, min_pts: int = 5):
        self.eps = eps
        self.min_pts = min_pts

    def fit(self, X, y=None):
        self.labels_ = dbscan(X, self.eps, self.min_pts)
        return self


class MeanShiftBaseline(BaseEstimator, ClusterMixin):
    """Estimator wrapper around :func:`meanshift`."""

    def __init__(self, bandwidth: float = 0.8, max_iters: int = 100, tol: float = 1e-3):
        self.bandwidth = bandwidth
        self.max_iters = max_iters
        self.tol = tol

    def fit(self, X, y=None):
        self.labels_, self.cluster_centers_ = meanshift(
            X, self.bandwidth, max_iters=self.max_iters, tol=self.tol)
        return self
