"""Supervision targets and loss formulas against hand-computed oracles."""
import numpy as np
import pytest

from panopt3d import (confidence_targets, instance_centers, mean_offset_error,
                      offset_loss, offset_targets, total_loss, wbce_loss)

from conftest import make_cloud, make_labels


@pytest.fixture()
def two_instances(tax):
    # instance 1: two crate points; instance 2: one pole point; plus ground
    coords = np.array([
        [0.0, 0.0, 0.0],
        [2.0, 4.0, 6.0],
        [10.0, 10.0, 1.0],
        [-5.0, 3.0, 0.0],
    ])
    cloud = make_cloud(coords)
    labels = make_labels([10, 10, 11, 1], [1, 1, 2, 0])
    return cloud, labels


def test_instance_centers_bbox_midpoint(two_instances, tax):
    cloud, labels = two_instances
    centers = instance_centers(cloud, labels, tax)
    np.testing.assert_allclose(centers[1], [1.0, 2.0, 3.0])
    np.testing.assert_allclose(centers[2], [10.0, 10.0, 1.0])
    assert set(centers) == {1, 2}


def test_offset_targets(two_instances, tax):
    cloud, labels = two_instances
    t = offset_targets(cloud, labels, tax)
    np.testing.assert_array_equal(t.things_mask, [True, True, True, False])
    np.testing.assert_allclose(t.targets[0], [1.0, 2.0, 3.0])
    np.testing.assert_allclose(t.targets[1], [-1.0, -2.0, -3.0])
    np.testing.assert_allclose(t.targets[2], [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(t.targets[3], [0.0, 0.0, 0.0])  # off-mask rows zero


def test_things_point_without_instance_is_unsupervised(tax):
    cloud = make_cloud([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
    labels = make_labels([10, 10], [0, 1])  # first point: things class, no instance
    t = offset_targets(cloud, labels, tax)
    np.testing.assert_array_equal(t.things_mask, [False, True])


def test_offset_loss_hand_value(two_instances, tax):
    cloud, labels = two_instances
    t = offset_targets(cloud, labels, tax)
    pred = t.targets.copy()
    pred[0] += [3.0, 4.0, 0.0]   # error norm 5 on point 0
    res = offset_loss(pred, t)
    assert not res.degenerate
    np.testing.assert_allclose(res.per_point[:3], [5.0, 0.0, 0.0])
    assert res.per_point[3] == 0.0
    np.testing.assert_allclose(res.total, 5.0 / 3.0)


def test_offset_loss_degenerate(tax):
    cloud = make_cloud([[0.0, 0.0, 0.0]])
    labels = make_labels([1], [0])  # stuff only
    t = offset_targets(cloud, labels, tax)
    res = offset_loss(np.zeros((1, 3)), t)
    assert res.degenerate
    assert res.total == 0.0


def test_confidence_targets_formula():
    mask = np.array([True, True, True, False])
    loss = np.array([0.0, 1.0, 2.0, 7.0])
    conf = confidence_targets(loss, mask, sigma=1.0)
    assert conf[0] == 1.0                                   # zero error -> exactly 1
    np.testing.assert_allclose(conf[1], np.exp(-0.5), rtol=0, atol=1e-15)
    np.testing.assert_allclose(conf[2], np.exp(-2.0), rtol=0, atol=1e-15)
    assert conf[3] == 0.0                                   # off-mask -> 0
    with pytest.raises(ValueError):
        confidence_targets(loss, mask, sigma=0.0)


def test_confidence_sigma_scaling():
    mask = np.array([True])
    conf = confidence_targets(np.array([3.0]), mask, sigma=3.0)
    np.testing.assert_allclose(conf[0], np.exp(-0.5), atol=1e-15)


def test_wbce_single_point_weight():
    # gt = 1, pred = e^-1: loss = -6 * log(e^-1) = 6
    val = wbce_loss(np.array([np.exp(-1.0)]), np.array([1.0]))
    np.testing.assert_allclose(val, 6.0, atol=1e-9)


def test_wbce_hand_average():
    pred = np.array([0.5, 0.5])
    gt = np.array([1.0, 0.0])
    # point 0: -6*log(0.5); point 1: -log(0.5); mean = 3.5*log(2)
    np.testing.assert_allclose(wbce_loss(pred, gt), 3.5 * np.log(2.0), atol=1e-12)


def test_wbce_clamps_extremes():
    val = wbce_loss(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    assert np.isfinite(val) and val > 0
    with pytest.raises(ValueError):
        wbce_loss(np.empty(0), np.empty(0))


def test_total_loss_weights():
    assert total_loss(1.0, 1.0, 1.0, 1.0, 1.0) == 8.0
    # weights (1, 3, 1, 2, 1), checked one slot at a time
    base = total_loss(0, 0, 0, 0, 0)
    assert base == 0.0
    assert total_loss(1, 0, 0, 0, 0) == 1.0
    assert total_loss(0, 1, 0, 0, 0) == 3.0
    assert total_loss(0, 0, 1, 0, 0) == 1.0
    assert total_loss(0, 0, 0, 1, 0) == 2.0
    assert total_loss(0, 0, 0, 0, 1) == 1.0


def test_mean_offset_error(two_instances, tax):
    cloud, labels = two_instances
    t = offset_targets(cloud, labels, tax)
    pred = t.targets.copy()
    pred[2] += [0.0, 3.0, 4.0]
    res = mean_offset_error(pred, t)
    np.testing.assert_allclose(res.value, 5.0 / 3.0)
    assert not res.degenerate
    empty = offset_targets(make_cloud([[0.0, 0.0, 0.0]]),
                           make_labels([1], [0]), tax)
    assert mean_offset_error(np.zeros((1, 3)), empty).degenerate
