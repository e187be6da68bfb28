import numpy as np
import pytest

from panopt3d import (ClassTaxonomy, PanopticLabels, PointCloud, PredictionSet,
                      default_taxonomy)


@pytest.fixture(scope="session")
def tax() -> ClassTaxonomy:
    return default_taxonomy()


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def make_cloud(coords) -> PointCloud:
    return PointCloud(coords=np.asarray(coords, dtype=np.float64))


def make_labels(semantic, instance) -> PanopticLabels:
    return PanopticLabels(semantic=np.asarray(semantic, dtype=np.uint32),
                          instance=np.asarray(instance, dtype=np.uint32))


def make_preds(semantic, offsets, confidence) -> PredictionSet:
    return PredictionSet(semantic=np.asarray(semantic, dtype=np.uint32),
                         offsets=np.asarray(offsets, dtype=np.float64),
                         confidence=np.asarray(confidence, dtype=np.float64))
