"""Clustering baselines against naive reference implementations."""
import numpy as np
import pytest

from panopt3d import DBSCANBaseline, MeanShiftBaseline, dbscan, meanshift


def _naive_dbscan(points, eps, min_pts):
    """Literal O(n^2) DBSCAN for cross-checking (same seed order)."""
    n = points.shape[0]
    d2 = ((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
    neighbors = [np.flatnonzero(d2[i] <= eps * eps) for i in range(n)]
    core = np.array([len(nb) >= min_pts for nb in neighbors])
    labels = np.full(n, -1, dtype=np.int64)
    cid = 0
    for i in range(n):
        if labels[i] != -1 or not core[i]:
            continue
        stack = [i]
        labels[i] = cid
        while stack:
            j = stack.pop()
            if not core[j]:
                continue
            for k in neighbors[j]:
                if labels[k] == -1:
                    labels[k] = cid
                    if core[k]:
                        stack.append(k)
        cid += 1
    return labels


def _as_partition(labels):
    """Cluster memberships as a canonical set of frozensets (noise separate)."""
    clusters = {}
    for i, lab in enumerate(labels):
        if lab >= 0:
            clusters.setdefault(int(lab), []).append(i)
    return {frozenset(v) for v in clusters.values()}


def test_dbscan_matches_naive(rng):
    for _ in range(10):
        n = int(rng.integers(5, 250))
        pts = rng.uniform(-4, 4, (n, 3))
        eps = float(rng.uniform(0.3, 1.5))
        min_pts = int(rng.integers(2, 8))
        got = dbscan(pts, eps=eps, min_pts=min_pts)
        want = _naive_dbscan(pts, eps, min_pts)
        assert _as_partition(got) == _as_partition(want)
        np.testing.assert_array_equal(got < 0, want < 0)


def test_dbscan_eps_boundary_inclusive():
    pts = np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]])
    labels = dbscan(pts, eps=1.0, min_pts=2)          # <= eps counts
    assert len(set(labels.tolist())) == 1 and (labels >= 0).all()
    labels = dbscan(pts, eps=0.999, min_pts=2)
    assert (labels == -1).all()                        # all noise


def test_dbscan_noise_and_min_pts():
    pts = np.vstack([np.zeros((5, 3)), [[10.0, 0, 0]]])
    labels = dbscan(pts, eps=0.5, min_pts=3)
    assert (labels[:5] == labels[0]).all() and labels[0] >= 0
    assert labels[5] == -1


def test_meanshift_two_blobs(rng):
    a = rng.normal(0, 0.08, (60, 3))
    b = rng.normal(0, 0.08, (60, 3)) + [5.0, 0.0, 0.0]
    pts = np.vstack([a, b])
    labels, centers = meanshift(pts, bandwidth=1.0)
    assert len(set(labels.tolist())) == 2
    assert (labels[:60] == labels[0]).all()
    assert (labels[60:] == labels[60]).all()
    got = np.sort(centers[:, 0])
    np.testing.assert_allclose(got, [0.0, 5.0], atol=0.2)


def test_meanshift_identical_points():
    pts = np.zeros((20, 3))
    labels, centers = meanshift(pts, bandwidth=0.5)
    assert (labels == 0).all()
    assert centers.shape == (1, 3)
    np.testing.assert_allclose(centers[0], [0, 0, 0])


def test_meanshift_partition_permutation_invariant(rng):
    pts = np.vstack([rng.normal(0, 0.1, (40, 3)),
                     rng.normal(0, 0.1, (40, 3)) + [4.0, 0, 0],
                     rng.normal(0, 0.1, (40, 3)) + [0.0, 4.0, 0]])
    labels, _ = meanshift(pts, bandwidth=1.0)
    perm = rng.permutation(pts.shape[0])
    plabels, _ = meanshift(pts[perm], bandwidth=1.0)
    unperm = np.empty_like(plabels)
    unperm[perm] = plabels
    assert _as_partition(labels) == _as_partition(unperm)


def test_parameter_validation():
    with pytest.raises(ValueError):
        dbscan(np.zeros((3, 3)), eps=0.0, min_pts=2)
    with pytest.raises(ValueError):
        dbscan(np.zeros((3, 3)), eps=1.0, min_pts=0)
    with pytest.raises(ValueError):
        meanshift(np.zeros((3, 3)), bandwidth=-1.0)


def test_estimators(rng):
    pts = np.vstack([rng.normal(0, 0.05, (30, 3)),
                     rng.normal(0, 0.05, (30, 3)) + [3.0, 0, 0]])
    db = DBSCANBaseline(eps=0.5, min_pts=3).fit(pts)
    assert db.labels_.shape == (60,)
    ms = MeanShiftBaseline(bandwidth=1.0).fit(pts)
    assert ms.labels_.shape == (60,)
    assert ms.cluster_centers_.shape[0] == len(set(ms.labels_.tolist()))
    assert "eps" in db.get_params() and "bandwidth" in ms.get_params()
