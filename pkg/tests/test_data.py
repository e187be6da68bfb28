"""Data container validation and label-schema checking."""
import numpy as np
import pytest

from panopt3d import PanopticLabels, PointCloud, PredictionSet, validate_labels

from conftest import make_labels


def test_point_cloud_validation():
    with pytest.raises(ValueError):
        PointCloud(coords=np.zeros((4, 2)))
    with pytest.raises(ValueError):
        PointCloud(coords=np.array([[0.0, 0.0, np.nan]]))
    cloud = PointCloud(coords=np.zeros((3, 3)))
    assert cloud.features.shape == (3, 0)
    assert len(cloud) == 3


def test_containers_are_readonly():
    cloud = PointCloud(coords=np.zeros((2, 3)))
    with pytest.raises(ValueError):
        cloud.coords[0, 0] = 1.0
    labels = make_labels([1, 2], [0, 1])
    with pytest.raises(ValueError):
        labels.semantic[0] = 5


def test_labels_reject_negative_and_float():
    with pytest.raises(ValueError):
        PanopticLabels(semantic=np.array([-1]), instance=np.array([0]))
    with pytest.raises(ValueError):
        PanopticLabels(semantic=np.array([1.5]), instance=np.array([0]))
    with pytest.raises(ValueError):
        PanopticLabels(semantic=np.array([1], dtype=np.uint32),
                       instance=np.array([0, 0], dtype=np.uint32))


def test_prediction_set_validation():
    with pytest.raises(ValueError):
        PredictionSet(semantic=np.array([1], dtype=np.uint32),
                      offsets=np.zeros((1, 3)),
                      confidence=np.array([1.5]))  # out of [0, 1]
    with pytest.raises(ValueError):
        PredictionSet(offsets=np.zeros((1, 3)), confidence=np.array([0.5]))


def test_prediction_set_probabilities():
    probs = np.array([[0.1, 0.9], [0.8, 0.2]])
    preds = PredictionSet(offsets=np.zeros((2, 3)),
                          confidence=np.array([0.5, 0.5]),
                          probabilities=probs)
    np.testing.assert_array_equal(preds.semantic, [1, 0])
    with pytest.raises(ValueError):  # semantic must equal the argmax
        PredictionSet(semantic=np.array([0, 0], dtype=np.uint32),
                      offsets=np.zeros((2, 3)),
                      confidence=np.array([0.5, 0.5]), probabilities=probs)
    with pytest.raises(ValueError):  # rows must sum to 1
        PredictionSet(offsets=np.zeros((2, 3)),
                      confidence=np.array([0.5, 0.5]),
                      probabilities=np.array([[0.5, 0.2], [0.5, 0.5]]))


def test_validate_labels_clean(tax):
    labels = make_labels([1, 10, 10, 2], [0, 1, 1, 0])
    assert validate_labels(labels, tax) == []


def test_validate_labels_violations(tax):
    # point 0: unknown class; point 1: stuff with instance; instance 7 mixed
    labels = make_labels([999, 1, 10, 11], [0, 3, 7, 7])
    kinds = sorted(v.kind for v in validate_labels(labels, tax))
    assert kinds == ["mixed-instance", "stuff-instance", "unknown-class"]
    by_kind = {v.kind: v for v in validate_labels(labels, tax)}
    assert by_kind["unknown-class"].index == 0
    assert by_kind["stuff-instance"].index == 1
    assert by_kind["mixed-instance"].instance_id == 7


def test_validate_labels_ignore_with_instance(tax):
    labels = make_labels([0], [2])
    assert [v.kind for v in validate_labels(labels, tax)] == ["stuff-instance"]
