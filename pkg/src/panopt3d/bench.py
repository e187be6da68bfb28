"""Benchmark harness comparing instance-clustering back ends.

Each method consumes the same network-style predictions (semantics, offsets,
confidence) and produces full panoptic labels through the same selection,
shift, vote, and renumber steps — only the clustering stage differs:

- ``cdm_grid``:       greedy confidence-ranked dedup on a spatial hash grid
- ``cdm_bruteforce``: the same dedup with exhaustive pair checks
- ``dbscan``:         density clustering of the shifted points
- ``meanshift``:      mode seeking on the shifted points

Timings cover the full post-processing pass (selection through renumbering)
so methods are compared on end-to-end cost, not just the clustering kernel.
"""
from __future__ import annotations

import time

import numpy as np

from .baselines import dbscan, meanshift
from .data import PanopticLabels, PointCloud, PredictionSet
from .metrics import EvalReport, evaluate
from .pipeline import (PipelineParams, panoptic_postprocess, select_things,
                       vote_and_compact)
from .taxonomy import ClassTaxonomy

BENCH_METHODS = ("cdm_grid", "cdm_bruteforce", "dbscan", "meanshift")

DBSCAN_MIN_PTS = 5


def _baseline_labels(cloud: PointCloud, preds: PredictionSet,
                     taxonomy: ClassTaxonomy, params: PipelineParams,
                     method: str) -> PanopticLabels:
    """Post-process with a baseline clusterer instead of center dedup."""
    sem = np.array(preds.semantic, dtype=np.uint32, copy=True)
    instance = np.zeros(sem.shape[0], dtype=np.uint32)
    things_idx = select_things(preds.semantic, taxonomy)
    if things_idx.size:
        shifted = cloud.coords[things_idx] + preds.offsets[things_idx]
        if method == "dbscan":
            cluster = dbscan(shifted, eps=params.d, min_pts=DBSCAN_MIN_PTS)
            ids = cluster + 1  # noise (-1) lands on 0 for now
            noise = np.flatnonzero(cluster < 0)
            if noise.size:  # every noise point becomes its own instance
                base = int(cluster.max()) + 2 if cluster.max() >= 0 else 1
                ids[noise] = base + np.arange(noise.size)
        else:
            cluster, _ = meanshift(shifted, bandwidth=params.d)
            ids = cluster + 1
        instance[things_idx] = ids.astype(np.uint32)
        if params.majority_vote:
            sem, instance = vote_and_compact(sem, instance, taxonomy)
    return PanopticLabels(semantic=sem, instance=instance)


def run_method(cloud: PointCloud, preds: PredictionSet,
               taxonomy: ClassTaxonomy, params: PipelineParams,
               method: str) -> tuple[PanopticLabels, float]:
    """Run one method on one scan; return labels and elapsed milliseconds."""
    if method not in BENCH_METHODS:
        raise ValueError(f"unknown bench method {method!r}; "
                         f"expected one of {BENCH_METHODS}")
    t0 = time.perf_counter()
    if method.startswith("cdm_"):
        result = panoptic_postprocess(cloud, preds, taxonomy, params,
                                      dedup_method=method[len("cdm_"):])
        labels = result.labels
    else:
        labels = _baseline_labels(cloud, preds, taxonomy, params, method)
    return labels, (time.perf_counter() - t0) * 1e3


def warmup(taxonomy: ClassTaxonomy, methods=BENCH_METHODS) -> None:
    """Trigger JIT compilation so benchmark timings exclude it."""
    rng = np.random.default_rng(0)
    n = 64
    things_id = taxonomy.things_ids[0]
    cloud = PointCloud(coords=rng.normal(size=(n, 3)))
    preds = PredictionSet(
        semantic=np.full(n, things_id, dtype=np.uint32),
        offsets=np.zeros((n, 3)),
        confidence=np.full(n, 0.9),
    )
    for method in methods:
        run_method(cloud, preds, taxonomy, PipelineParams(), method)


class BenchResult(dict):
    """Per-method summary: timing quantiles plus panoptic quality."""


def run_bench(scans: list[tuple[PointCloud, PredictionSet, PanopticLabels | None]],
              taxonomy: ClassTaxonomy,
              params: PipelineParams | None = None,
              methods=BENCH_METHODS,
              repeats: int = 3,
              jit_warmup: bool = True) -> dict[str, dict]:
    """Time every method over ``scans`` and score it against ground truth.

    Parameters
    ----------
    scans:
        Triples of point cloud, predictions, and optional ground-truth
        labels. Quality is reported only when every scan has ground truth.
    repeats:
        Timed passes per scan; all passes feed the timing quantiles.

    Returns
    -------
    dict mapping method name to ``{"median_ms", "p95_ms", "pq", "runs"}``
    where ``pq`` is the all-class panoptic quality in percent (or ``None``
    without ground truth).
    """
    if params is None:
        params = PipelineParams()
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    for method in methods:
        if method not in BENCH_METHODS:
            raise ValueError(f"unknown bench method {method!r}; "
                             f"expected one of {BENCH_METHODS}")
    if jit_warmup:
        warmup(taxonomy, methods)
    have_gt = all(gt is not None for _, _, gt in scans) and bool(scans)
    out: dict[str, dict] = {}
    for method in methods:
        times: list[float] = []
        pairs = []
        for cloud, preds, gt in scans:
            labels = None
            for _ in range(repeats):
                labels, ms = run_method(cloud, preds, taxonomy, params, method)
                times.append(ms)
            if have_gt:
                pairs.append((gt, labels))
        report: EvalReport | None = None
        if have_gt:
            report = evaluate(pairs, taxonomy)
        out[method] = {
            "median_ms": float(np.median(times)) if times else float("nan"),
            "p95_ms": float(np.percentile(times, 95)) if times else float("nan"),
            "pq": round(report.pq * 100.0, 6) if report else None,
            "runs": len(times),
        }
    return out
