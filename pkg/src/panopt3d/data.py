"""Core data containers: point clouds, panoptic labels, and model predictions.

All containers are frozen dataclasses over immutable numpy arrays, so they can
be shared freely across worker threads/processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .taxonomy import ClassTaxonomy
from .validation import (
    check_class_ids,
    check_confidence,
    check_coords,
    check_instance_ids,
    check_offsets,
    check_same_length,
)

__all__ = ["PointCloud", "PanopticLabels", "PredictionSet", "Violation", "validate_labels"]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PointCloud:
    """N points with 3-D coordinates and optional per-point feature columns."""

    coords: np.ndarray                      # (N, 3) float64, finite
    features: np.ndarray = None             # (N, F) float64; default F = 0

    def __post_init__(self):
        coords = _freeze(check_coords(self.coords))
        if self.features is None:
            feats = np.zeros((coords.shape[0], 0), dtype=np.float64)
        else:
            feats = np.asarray(self.features, dtype=np.float64)
            if feats.ndim == 1:
                feats = feats[:, None]
            if feats.shape[0] != coords.shape[0]:
                raise ValueError(
                    f"features has {feats.shape[0]} rows but coords has {coords.shape[0]}")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "features", _freeze(feats))

    def __len__(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True)
class PanopticLabels:
    """Per-point semantic class ids and instance ids (0 = no instance)."""

    semantic: np.ndarray                    # (N,) uint32
    instance: np.ndarray                    # (N,) uint32

    def __post_init__(self):
        sem = check_class_ids(self.semantic, name="semantic")
        inst = check_instance_ids(self.instance, name="instance")
        check_same_length((sem, "semantic"), (inst, "instance"))
        object.__setattr__(self, "semantic", _freeze(sem))
        object.__setattr__(self, "instance", _freeze(inst))

    def __len__(self) -> int:
        return self.semantic.shape[0]


@dataclass(frozen=True)
class PredictionSet:
    """Per-point network outputs consumed by the post-processing pipeline.

    ``semantic`` may be given directly, or derived as the row-wise argmax of
    ``probabilities``. Offsets must be finite; confidences must lie in [0, 1].
    """

    semantic: np.ndarray = None             # (N,) uint32
    offsets: np.ndarray = None              # (N, 3) float64
    confidence: np.ndarray = None           # (N,) float64 in [0, 1]
    probabilities: Optional[np.ndarray] = None  # (N, J) float64, rows sum to 1

    def __post_init__(self):
        if self.offsets is None or self.confidence is None:
            raise ValueError("offsets and confidence are required")
        offsets = check_offsets(self.offsets)
        n = offsets.shape[0]
        confidence = check_confidence(self.confidence, n)

        probs = self.probabilities
        if probs is not None:
            probs = np.asarray(probs, dtype=np.float64)
            if probs.ndim != 2 or probs.shape[0] != n:
                raise ValueError(f"probabilities must have shape (N, J), got {probs.shape}")
            row_sums = probs.sum(axis=1)
            if probs.size and not np.allclose(row_sums, 1.0, atol=1e-5):
                raise ValueError("probability rows must sum to 1")
            derived = np.argmax(probs, axis=1).astype(np.uint32)
            if self.semantic is None:
                semantic = derived
            else:
                semantic = check_class_ids(self.semantic, n)
                if not np.array_equal(semantic, derived):
                    raise ValueError("semantic must equal row-wise argmax of probabilities")
            probs = _freeze(probs)
        elif self.semantic is None:
            raise ValueError("either semantic or probabilities must be given")
        else:
            semantic = check_class_ids(self.semantic, n)

        object.__setattr__(self, "semantic", _freeze(semantic))
        object.__setattr__(self, "offsets", _freeze(offsets))
        object.__setattr__(self, "confidence", _freeze(confidence))
        object.__setattr__(self, "probabilities", probs)

    def __len__(self) -> int:
        return self.semantic.shape[0]


@dataclass(frozen=True)
class Violation:
    """One breach of the panoptic label schema."""

    kind: str                               # "stuff-instance" | "mixed-instance" | "unknown-class"
    message: str
    index: Optional[int] = None             # point index, for per-point breaches
    instance_id: Optional[int] = None       # instance id, for per-instance breaches


def validate_labels(labels: PanopticLabels, taxonomy: ClassTaxonomy) -> list[Violation]:
    """Check panoptic labels against the schema; empty list means valid.

    Rules:
      1. stuff-class and ignore-class points carry instance id 0;
      2. all points sharing a positive instance id share one semantic class;
      3. every semantic id is known to the taxonomy.
    """
    sem = labels.semantic
    inst = labels.instance
    violations: list[Violation] = []

    codes = taxonomy._codes(sem, strict=False)
    for i in np.flatnonzero(codes == 0):
        violations.append(Violation(
            kind="unknown-class", index=int(i),
            message=f"point {i}: semantic id {int(sem[i])} not in taxonomy"))

    stuffish = (codes == 1) | (codes == 2)  # ignore or stuff
    for i in np.flatnonzero(stuffish & (inst != 0)):
        violations.append(Violation(
            kind="stuff-instance", index=int(i),
            message=f"point {i}: stuff/ignore class {int(sem[i])} has instance {int(inst[i])}"))

    positive = inst > 0
    for iid in np.unique(inst[positive]):
        classes = np.unique(sem[inst == iid])
        if classes.size > 1:
            violations.append(Violation(
                kind="mixed-instance", instance_id=int(iid),
                message=f"instance {int(iid)} spans classes {classes.tolist()}"))
    return violations
