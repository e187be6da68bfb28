"""Panoptic and semantic evaluation.

Matching follows the standard point-level panoptic protocol: ground-truth and
predicted segments of the same class match when their IoU strictly exceeds
0.5 (which makes matches unique), per-class quality is

    PQ = sum(IoU of matches) / (TP + FP/2 + FN/2),  SQ = sum(IoU) / TP,
    RQ = TP / (TP + FP/2 + FN/2),

and aggregates are unweighted means over the classes present in ground truth
or predictions. Points whose ground-truth class is the ignore class are
excluded from evaluation entirely, so predictions covering them are never
penalized. Stuff classes form one segment per scan.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import PanopticLabels
from .taxonomy import ClassTaxonomy

__all__ = ["segments", "MatchStats", "match_scan", "evaluate", "EvalReport",
           "pq_identity_check", "IOU_MATCH_THRESHOLD"]

IOU_MATCH_THRESHOLD = 0.5


def segments(labels: PanopticLabels, taxonomy: ClassTaxonomy) -> dict:
    """Group points into panoptic segments.

    Returns ``{(class_id, segment_key): index_array}``. Things segments are
    keyed by instance id; every stuff class forms at most one segment per
    scan, keyed 0. Ignore-class points form no segment.
    """
    sem = labels.semantic
    inst = labels.instance
    out: dict[tuple[int, int], np.ndarray] = {}
    for cid in taxonomy.class_ids:
        rows = np.flatnonzero(sem == cid)
        if rows.size == 0:
            continue
        if taxonomy.is_things(cid):
            keys = inst[rows]
            for key in np.unique(keys):
                out[(int(cid), int(key))] = rows[keys == key]
        else:
            out[(int(cid), 0)] = rows
    return out


@dataclass
class MatchStats:
    """Additive per-class matching and confusion accumulators."""

    class_ids: tuple[int, ...]
    tp: np.ndarray = None
    fp: np.ndarray = None
    fn: np.ndarray = None
    iou_sum: np.ndarray = None
    sem_inter: np.ndarray = None   # |gt == c and pred == c|
    sem_gt: np.ndarray = None      # |gt == c|
    sem_pred: np.ndarray = None    # |pred == c|
    n_scans: int = 0

    def __post_init__(self):
        c = len(self.class_ids)
        for name, dtype in (("tp", np.int64), ("fp", np.int64), ("fn", np.int64),
                            ("iou_sum", np.float64), ("sem_inter", np.int64),
                            ("sem_gt", np.int64), ("sem_pred", np.int64)):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(c, dtype=dtype))

    def merge(self, other: "MatchStats") -> "MatchStats":
        """Accumulate another stats object into this one (returns self)."""
        if other.class_ids != self.class_ids:
            raise ValueError("cannot merge stats over different taxonomies")
        for name in ("tp", "fp", "fn", "iou_sum", "sem_inter", "sem_gt", "sem_pred"):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.n_scans += other.n_scans
        return self


def _group_sizes(keys: np.ndarray) -> dict[int, int]:
    values, counts = np.unique(keys, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def match_scan(gt: PanopticLabels, pred: PanopticLabels, taxonomy: ClassTaxonomy,
               *, min_points: int = 0) -> MatchStats:
    """Match one scan's predicted segments against ground truth.

    ``min_points``: unmatched segments smaller than this do not count as
    FP/FN (0 disables the filter; matching itself is unaffected).
    """
    if len(gt) != len(pred):
        raise ValueError(f"gt has {len(gt)} points but pred has {len(pred)}")
    stats = MatchStats(class_ids=tuple(taxonomy.class_ids))
    stats.n_scans = 1

    valid = gt.semantic != taxonomy.ignore_id
    gs = gt.semantic[valid].astype(np.int64)
    gi = gt.instance[valid].astype(np.int64)
    ps = pred.semantic[valid].astype(np.int64)
    pi = pred.instance[valid].astype(np.int64)

    for ci, cid in enumerate(stats.class_ids):
        gt_rows = gs == cid
        pred_rows = ps == cid
        n_gt = int(gt_rows.sum())
        n_pred = int(pred_rows.sum())
        stats.sem_gt[ci] = n_gt
        stats.sem_pred[ci] = n_pred
        stats.sem_inter[ci] = int((gt_rows & pred_rows).sum())
        if n_gt == 0 and n_pred == 0:
            continue

        things = taxonomy.is_things(cid)
        gt_sizes = _group_sizes(gi[gt_rows]) if things else ({0: n_gt} if n_gt else {})
        pred_sizes = _group_sizes(pi[pred_rows]) if things else ({0: n_pred} if n_pred else {})

        both = gt_rows & pred_rows
        if things:
            pair_keys = (gi[both] << np.int64(32)) | pi[both]
            pairs = {(int(k >> np.int64(32)), int(k & np.int64(0xFFFFFFFF))): int(c)
                     for k, c in zip(*np.unique(pair_keys, return_counts=True))}
        else:
            n_both = int(both.sum())
            pairs = {(0, 0): n_both} if n_both else {}

        matched_gt: set[int] = set()
        matched_pred: set[int] = set()
        for (gkey, pkey), inter in pairs.items():
            union = gt_sizes[gkey] + pred_sizes[pkey] - inter
            iou = inter / union
            if iou > IOU_MATCH_THRESHOLD:
                stats.tp[ci] += 1
                stats.iou_sum[ci] += iou
                matched_gt.add(gkey)
                matched_pred.add(pkey)
        stats.fn[ci] += sum(1 for k, size in gt_sizes.items()
                            if k not in matched_gt and size >= min_points)
        stats.fp[ci] += sum(1 for k, size in pred_sizes.items()
                            if k not in matched_pred and size >= min_points)
    return stats


@dataclass(frozen=True)
class ClassReport:
    """Per-class evaluation result (all quality values as fractions in [0, 1])."""

    class_id: int
    name: str
    kind: str
    present: bool
    pq: float
    sq: float
    rq: float
    iou: float
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class EvalReport:
    """Aggregated evaluation over one or more scans.

    All quality fields are fractions in [0, 1]; serialization and the text
    table report them scaled by 100.
    """

    per_class: dict[int, ClassReport]
    pq: float
    pq_dagger: float
    sq: float
    rq: float
    pq_things: float
    sq_things: float
    rq_things: float
    pq_stuff: float
    sq_stuff: float
    rq_stuff: float
    miou: float
    n_scans: int = 0

    _AGG_FIELDS = ("pq", "pq_dagger", "sq", "rq", "pq_things", "sq_things",
                   "rq_things", "pq_stuff", "sq_stuff", "rq_stuff", "miou")

    def to_json_dict(self) -> dict:
        return {
            "n_scans": self.n_scans,
            "aggregates": {k: getattr(self, k) * 100.0 for k in self._AGG_FIELDS},
            "classes": {
                r.name: {
                    "id": r.class_id, "kind": r.kind, "present": r.present,
                    "pq": r.pq * 100.0, "sq": r.sq * 100.0, "rq": r.rq * 100.0,
                    "iou": r.iou * 100.0,
                    "tp": r.tp, "fp": r.fp, "fn": r.fn,
                }
                for r in self.per_class.values()
            },
        }

    def table(self) -> str:
        """Plain-text summary table (values scaled by 100)."""
        lines = []
        head = f"{'':<14}{'PQ':>8}{'PQ†':>8}{'SQ':>8}{'RQ':>8}{'mIoU':>8}"
        lines.append(head)
        lines.append("-" * len(head))
        lines.append(f"{'all':<14}{self.pq * 100:>8.1f}{self.pq_dagger * 100:>8.1f}"
                     f"{self.sq * 100:>8.1f}{self.rq * 100:>8.1f}{self.miou * 100:>8.1f}")
        lines.append(f"{'things':<14}{self.pq_things * 100:>8.1f}{'':>8}"
                     f"{self.sq_things * 100:>8.1f}{self.rq_things * 100:>8.1f}{'':>8}")
        lines.append(f"{'stuff':<14}{self.pq_stuff * 100:>8.1f}{'':>8}"
                     f"{self.sq_stuff * 100:>8.1f}{self.rq_stuff * 100:>8.1f}{'':>8}")
        lines.append("")
        head = f"{'class':<14}{'PQ':>8}{'SQ':>8}{'RQ':>8}{'IoU':>8}{'TP':>6}{'FP':>6}{'FN':>6}"
        lines.append(head)
        lines.append("-" * len(head))
        for r in self.per_class.values():
            if not r.present:
                continue
            lines.append(f"{r.name:<14}{r.pq * 100:>8.1f}{r.sq * 100:>8.1f}"
                         f"{r.rq * 100:>8.1f}{r.iou * 100:>8.1f}"
                         f"{r.tp:>6}{r.fp:>6}{r.fn:>6}")
        return "\n".join(lines)


def _report_from_stats(stats: MatchStats, taxonomy: ClassTaxonomy) -> EvalReport:
    per_class: dict[int, ClassReport] = {}
    rows = []
    for ci, cid in enumerate(stats.class_ids):
        tp, fp, fn = int(stats.tp[ci]), int(stats.fp[ci]), int(stats.fn[ci])
        iou_sum = float(stats.iou_sum[ci])
        denom = tp + 0.5 * fp + 0.5 * fn
        pq = iou_sum / denom if denom > 0 else 0.0
        sq = iou_sum / tp if tp > 0 else 0.0
        rq = tp / denom if denom > 0 else 0.0
        union = int(stats.sem_gt[ci] + stats.sem_pred[ci] - stats.sem_inter[ci])
        iou = float(stats.sem_inter[ci]) / union if union > 0 else 0.0
        present = union > 0 or (tp + fp + fn) > 0
        kind = "things" if taxonomy.is_things(cid) else "stuff"
        report = ClassReport(class_id=cid, name=taxonomy.name_of(cid), kind=kind,
                             present=present, pq=pq, sq=sq, rq=rq, iou=iou,
                             tp=tp, fp=fp, fn=fn)
        per_class[cid] = report
        rows.append(report)

    def mean(values: list[float]) -> float:
        return float(np.mean(values)) if values else 0.0

    present = [r for r in rows if r.present]
    things = [r for r in present if r.kind == "things"]
    stuff = [r for r in present if r.kind == "stuff"]
    return EvalReport(
        per_class=per_class,
        pq=mean([r.pq for r in present]),
        pq_dagger=mean([r.iou if r.kind == "stuff" else r.pq for r in present]),
        sq=mean([r.sq for r in present]),
        rq=mean([r.rq for r in present]),
        pq_things=mean([r.pq for r in things]),
        sq_things=mean([r.sq for r in things]),
        rq_things=mean([r.rq for r in things]),
        pq_stuff=mean([r.pq for r in stuff]),
        sq_stuff=mean([r.sq for r in stuff]),
        rq_stuff=mean([r.rq for r in stuff]),
        miou=mean([r.iou for r in present]),
        n_scans=stats.n_scans,
    )


def evaluate(scan_pairs, taxonomy: ClassTaxonomy, *, min_points: int = 0) -> EvalReport:
    """Evaluate ``(gt, pred)`` label pairs; accumulators make this streamable.

    ``scan_pairs`` is an iterable of (PanopticLabels, PanopticLabels). The
    result is identical whether scans are evaluated in one call or their
    MatchStats are accumulated incrementally and reported once.
    """
    stats = MatchStats(class_ids=tuple(taxonomy.class_ids))
    for gt, pred in scan_pairs:
        stats.merge(match_scan(gt, pred, taxonomy, min_points=min_points))
    return _report_from_stats(stats, taxonomy)


def evaluate_stats(stats: MatchStats, taxonomy: ClassTaxonomy) -> EvalReport:
    """Build a report from pre-accumulated MatchStats."""
    return _report_from_stats(stats, taxonomy)


def pq_identity_check(report: EvalReport, tol: float = 1e-9) -> bool:
    """Verify PQ == SQ * RQ per class (wherever RQ > 0)."""
    for r in report.per_class.values():
        if r.rq > 0 and abs(r.pq - r.sq * r.rq) > tol:
            return False
    return True
