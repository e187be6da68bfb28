"""End-to-end panoptic post-processing: predictions in, panoptic labels out.

Five steps per scan:

1. select the points whose *predicted* semantic class is a things class;
2. shift every selected point by its predicted offset (no confidence gate —
   the gate belongs to the feature-enhancement shift, not to clustering);
3. deduplicate the shifted points into instance centers, ranked by predicted
   confidence;
4. assign each selected point to its nearest kept center;
5. optionally majority-vote the semantic label within each instance.

Stuff and ignore points always receive instance id 0; instance ids are
compact ``1..D`` ordinals in kept-center order.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator

from .data import PanopticLabels, PointCloud, PredictionSet
from .dedup import KeptCenters, dedup_centers_bruteforce, dedup_centers_grid
from .taxonomy import ClassTaxonomy
from .validation import check_coords

__all__ = ["PipelineParams", "PipelineResult", "select_things", "assign_to_centers",
           "majority_vote", "vote_and_compact", "panoptic_postprocess",
           "PanopticPipeline"]


@dataclass(frozen=True)
class PipelineParams:
    """Tunable knobs of the post-processing pipeline.

    ``delta`` is carried for configuration completeness (it gates the
    feature-enhancement shift elsewhere); clustering itself shifts ungated.
    """

    d: float = 0.8
    delta: float = 0.2
    majority_vote: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.d) and self.d > 0.0):
            raise ValueError(f"d must be positive, got {self.d}")
        if not (0.0 <= self.delta < 1.0):
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")

    def to_json_dict(self) -> dict:
        return {"d": float(self.d), "delta": float(self.delta),
                "majority_vote": bool(self.majority_vote)}

    @classmethod
    def from_json_dict(cls, data: dict) -> "PipelineParams":
        return cls(d=float(data.get("d", 0.8)), delta=float(data.get("delta", 0.2)),
                   majority_vote=bool(data.get("majority_vote", True)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "PipelineParams":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def select_things(pred_semantic, taxonomy: ClassTaxonomy) -> np.ndarray:
    """Indices of points predicted as things classes (ascending order)."""
    mask = taxonomy.things_mask(np.asarray(pred_semantic), strict=True)
    return np.flatnonzero(mask)


def assign_to_centers(shifted, centers: KeptCenters | np.ndarray,
                      chunk: int = 16384) -> np.ndarray:
    """Nearest-center assignment; ties go to the lowest center ordinal.

    Returns (M,) int64 ordinals into the kept-center order.
    """
    pts = check_coords(shifted, name="shifted")
    ctr = centers.coords if isinstance(centers, KeptCenters) else np.asarray(centers, float)
    if pts.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    if ctr.shape[0] == 0:
        raise RuntimeError("assign_to_centers called with zero centers for M > 0 points")
    # ||x - c||^2 = ||x||^2 - 2 x.c + ||c||^2; the ||x||^2 row term is constant
    # per point and cannot change the argmin, so it is dropped
    c2 = (ctr * ctr).sum(axis=1)
    out = np.empty(pts.shape[0], dtype=np.int64)
    for lo in range(0, pts.shape[0], chunk):
        block = pts[lo:lo + chunk]
        d2 = c2[None, :] - 2.0 * (block @ ctr.T)
        out[lo:lo + chunk] = np.argmin(d2, axis=1)
    return out


def majority_vote(semantic, instance, taxonomy: ClassTaxonomy
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Replace each instance's semantics by its modal class.

    Ties break toward the smallest class id. When the winning class is a
    stuff class, the instance's points are demoted to instance id 0.
    Returns updated ``(semantic, instance)`` arrays.
    """
    sem = np.array(semantic, dtype=np.uint32, copy=True)
    inst = np.array(instance, dtype=np.uint32, copy=True)
    pos = inst > 0
    if not pos.any():
        return sem, inst
    # count (instance, class) pairs, then pick each instance's first row under
    # (instance, descending count, ascending class): the modal class, ties
    # toward the smallest class id
    keys = (inst[pos].astype(np.int64) << 32) | sem[pos].astype(np.int64)
    uniq, counts = np.unique(keys, return_counts=True)
    iids = (uniq >> 32)
    classes = (uniq & 0xFFFFFFFF).astype(np.uint32)
    order = np.lexsort((classes, -counts, iids))
    siids = iids[order]
    first = np.ones(siids.size, dtype=bool)
    first[1:] = siids[1:] != siids[:-1]
    win_iid = siids[first]
    win_class = classes[order][first]

    lut = np.zeros(int(win_iid[-1]) + 1, dtype=np.uint32)
    lut[win_iid] = win_class
    sem[pos] = lut[inst[pos]]
    demoted = win_iid[~taxonomy.things_mask(win_class, strict=False)]
    if demoted.size:
        inst[pos & np.isin(inst, demoted)] = 0
    return sem, inst


def vote_and_compact(semantic, instance, taxonomy: ClassTaxonomy
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Majority-vote semantics, then renumber surviving instances 1..K.

    Stuff-winner demotions can leave holes in the instance id range; the
    compaction preserves the relative order of the surviving ids.
    """
    sem, inst = majority_vote(semantic, instance, taxonomy)
    survivors = np.unique(inst[inst > 0])
    if survivors.size and (int(survivors[-1]) != survivors.size):
        remap = np.zeros(int(survivors[-1]) + 1, dtype=np.uint32)
        remap[survivors] = np.arange(1, survivors.size + 1, dtype=np.uint32)
        inst = remap[inst]
    return sem, inst


@dataclass(frozen=True)
class PipelineResult:
    """Labels plus run diagnostics from one post-processing pass."""

    labels: PanopticLabels
    kept_centers: KeptCenters
    stage_ms: dict = field(default_factory=dict)


def panoptic_postprocess(cloud: PointCloud, preds: PredictionSet,
                         taxonomy: ClassTaxonomy,
                         params: PipelineParams | None = None,
                         *, dedup_method: str = "grid") -> PipelineResult:
    """Run the five-step post-process on one scan.

    ``dedup_method`` selects the center-deduplication implementation
    ("grid" or "bruteforce"); both yield identical labels.
    """
    if params is None:
        params = PipelineParams()
    if len(cloud) != len(preds):
        raise ValueError(f"cloud has {len(cloud)} points but predictions have {len(preds)}")
    backends = {"grid": dedup_centers_grid, "bruteforce": dedup_centers_bruteforce}
    if dedup_method not in backends:
        raise ValueError(f"dedup_method must be one of {sorted(backends)}, "
                         f"got {dedup_method!r}")
    dedup = backends[dedup_method]

    stage_ms: dict[str, float] = {}
    t0 = time.perf_counter()

    sem = np.array(preds.semantic, dtype=np.uint32, copy=True)
    things_idx = select_things(sem, taxonomy)
    instance = np.zeros(len(cloud), dtype=np.uint32)

    t1 = time.perf_counter()
    stage_ms["select"] = (t1 - t0) * 1e3

    if things_idx.size:
        shifted = cloud.coords[things_idx] + preds.offsets[things_idx]
        t2 = time.perf_counter()
        stage_ms["shift"] = (t2 - t1) * 1e3

        kept = dedup(shifted, preds.confidence[things_idx], params.d)
        t3 = time.perf_counter()
        stage_ms["dedup"] = (t3 - t2) * 1e3

        ordinals = assign_to_centers(shifted, kept)
        instance[things_idx] = (ordinals + 1).astype(np.uint32)
        t4 = time.perf_counter()
        stage_ms["assign"] = (t4 - t3) * 1e3
    else:
        kept = KeptCenters(indices=np.empty(0, np.int64), coords=np.empty((0, 3)))
        stage_ms["shift"] = 0.0
        stage_ms["dedup"] = 0.0
        stage_ms["assign"] = 0.0
        t4 = time.perf_counter()

    if params.majority_vote and things_idx.size:
        sem, instance = vote_and_compact(sem, instance, taxonomy)
    stage_ms["vote"] = (time.perf_counter() - t4) * 1e3
    stage_ms["total"] = (time.perf_counter() - t0) * 1e3

    labels = PanopticLabels(semantic=sem, instance=instance)
    return PipelineResult(labels=labels, kept_centers=kept, stage_ms=stage_ms)


class PanopticPipeline(BaseEstimator):
    """Scikit-learn style front-end for the post-processing pipeline.

    Parameters mirror :class:`PipelineParams`; ``predict`` maps a point cloud
    plus network predictions to panoptic labels.
    """

    def __init__(self, taxonomy: ClassTaxonomy = None, d: float = 0.8,
                 delta: float = 0.2, majority_vote: bool = True,
                 dedup_method: str = "grid"):
        self.taxonomy = taxonomy
        self.d = d
        self.delta = delta
        self.majority_vote = majority_vote
        self.dedup_method = dedup_method

    def _params(self) -> PipelineParams:
        return PipelineParams(d=self.d, delta=self.delta, majority_vote=self.majority_vote)

    def fit(self, X=None, y=None):
        """No-op; present for pipeline compatibility."""
        if self.taxonomy is None:
            raise ValueError("taxonomy must be set before use")
        return self

    def predict(self, cloud: PointCloud, preds: PredictionSet) -> PanopticLabels:
        if self.taxonomy is None:
            raise ValueError("taxonomy must be set before use")
        return panoptic_postprocess(cloud, preds, self.taxonomy, self._params(),
                                    dedup_method=self.dedup_method).labels
