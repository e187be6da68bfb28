"""Center deduplication: greedy semantics, grid/bruteforce equivalence."""
import numpy as np
import pytest

from panopt3d import (CenterDedup, dedup_centers_bruteforce, dedup_centers_grid,
                      ranked_order)


def _random_case(rng, n, scale=5.0):
    pos = rng.uniform(-scale, scale, (n, 3))
    conf = rng.random(n)
    return pos, conf


def test_ranked_order_stable_ties():
    conf = np.array([0.5, 0.9, 0.5, 0.9])
    np.testing.assert_array_equal(ranked_order(conf), [1, 3, 0, 2])


def test_single_and_empty():
    for fn in (dedup_centers_bruteforce, dedup_centers_grid):
        kept = fn(np.zeros((0, 3)), np.zeros(0), d=1.0)
        assert kept.indices.size == 0 and kept.coords.shape == (0, 3)
        kept = fn(np.array([[1.0, 2.0, 3.0]]), np.array([0.5]), d=1.0)
        np.testing.assert_array_equal(kept.indices, [0])


def test_greedy_semantics_hand_case():
    # B outranks A; C survives only because A (its suppressor) was suppressed
    # by B first? No: greedy suppression is by *kept* centers only.
    pos = np.array([
        [0.0, 0.0, 0.0],   # A, conf 0.8 -> suppressed by B
        [0.5, 0.0, 0.0],   # B, conf 0.9 -> kept first
        [1.2, 0.0, 0.0],   # C, conf 0.7 -> 0.7 from B: kept (dist >= d)
    ])
    conf = np.array([0.8, 0.9, 0.7])
    for fn in (dedup_centers_bruteforce, dedup_centers_grid):
        kept = fn(pos, conf, d=0.7)
        np.testing.assert_array_equal(kept.indices, [1, 2])


def test_suppression_is_strictly_less_than_d():
    pos = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    conf = np.array([0.9, 0.8])
    for fn in (dedup_centers_bruteforce, dedup_centers_grid):
        # distance exactly d is NOT suppressed
        kept = fn(pos, conf, d=1.0)
        np.testing.assert_array_equal(kept.indices, [0, 1])
        kept = fn(pos, conf, d=1.0000001)
        np.testing.assert_array_equal(kept.indices, [0])


def test_kept_order_is_confidence_rank():
    pos = np.array([[0.0, 0, 0], [10.0, 0, 0], [20.0, 0, 0]])
    conf = np.array([0.1, 0.9, 0.5])
    for fn in (dedup_centers_bruteforce, dedup_centers_grid):
        kept = fn(pos, conf, d=1.0)
        np.testing.assert_array_equal(kept.indices, [1, 2, 0])
        np.testing.assert_allclose(kept.coords, pos[[1, 2, 0]])


def test_invariants_random(rng):
    for _ in range(20):
        n = int(rng.integers(1, 300))
        pos, conf = _random_case(rng, n, scale=3.0)
        d = float(rng.uniform(0.3, 2.0))
        kept = dedup_centers_grid(pos, conf, d=d)
        k = kept.coords
        # kept centers are pairwise >= d apart (squared predicate is strict <)
        if k.shape[0] > 1:
            d2 = ((k[:, None, :] - k[None, :, :]) ** 2).sum(axis=2)
            d2[np.diag_indices_from(d2)] = np.inf
            assert d2.min() >= d * d
        # every rejected candidate has a kept center strictly within d
        rejected = np.setdiff1d(np.arange(n), kept.indices)
        if rejected.size:
            d2 = ((pos[rejected][:, None, :] - k[None, :, :]) ** 2).sum(axis=2)
            assert (d2.min(axis=1) < d * d).all()


def test_grid_equals_bruteforce_random(rng):
    for _ in range(30):
        n = int(rng.integers(0, 400))
        pos, conf = _random_case(rng, n)
        d = float(rng.uniform(0.2, 3.0))
        a = dedup_centers_bruteforce(pos, conf, d=d)
        b = dedup_centers_grid(pos, conf, d=d)
        np.testing.assert_array_equal(a.indices, b.indices)
        np.testing.assert_array_equal(a.coords, b.coords)


def test_grid_equals_bruteforce_adversarial():
    # integer lattice at spacing exactly d, equal confidences, duplicates
    xs, ys = np.meshgrid(np.arange(6, dtype=float), np.arange(6, dtype=float))
    pos = np.column_stack([xs.ravel(), ys.ravel(), np.zeros(36)])
    pos = np.vstack([pos, pos[:5]])  # exact duplicates
    conf = np.full(pos.shape[0], 0.5)
    a = dedup_centers_bruteforce(pos, conf, d=1.0)
    b = dedup_centers_grid(pos, conf, d=1.0)
    np.testing.assert_array_equal(a.indices, b.indices)
    # lattice spacing == d -> nothing suppressed except exact duplicates
    assert a.indices.size == 36


def test_rescale_invariance(rng):
    pos, conf = _random_case(rng, 150)
    base = dedup_centers_grid(pos, conf, d=0.9)
    for factor in (0.25, 4.0, 1024.0):  # powers of two: exact float scaling
        scaled = dedup_centers_grid(pos * factor, conf, d=0.9 * factor)
        np.testing.assert_array_equal(base.indices, scaled.indices)


def test_validation():
    with pytest.raises(ValueError):
        dedup_centers_grid(np.zeros((2, 3)), np.zeros(2), d=0.0)
    with pytest.raises(ValueError):
        dedup_centers_grid(np.zeros((2, 3)), np.array([0.5]), d=1.0)


def test_estimator_api():
    est = CenterDedup(d=0.5, method="grid")
    assert est.get_params()["d"] == 0.5
    est.set_params(d=1.0)
    pos = np.array([[0.0, 0, 0], [0.2, 0, 0], [5.0, 0, 0]])
    conf = np.array([0.9, 0.8, 0.7])
    est.fit(pos, sample_weight=conf)
    np.testing.assert_array_equal(est.kept_indices_, [0, 2])
    np.testing.assert_array_equal(est.labels_, [0, 0, 1])
    assert est.cluster_centers_.shape == (2, 3)
