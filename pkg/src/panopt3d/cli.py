"""Command-line interface.

Subcommands
-----------
synth     generate synthetic scans, ground truth, and oracle predictions
segment   run panoptic post-processing over a directory of scans
eval      score predicted panoptic labels against ground truth
targets   derive supervision targets (offsets + confidences) from ground truth
bench     time the clustering back ends on the same inputs
sweep     re-run segment + eval across a parameter range, emitting a CSV

Every run writes exactly one JSON run manifest next to its outputs, recording
the tool version, the resolved parameters, inputs, outputs, the seed (when
one applies), and wall-clock timings. All binary artifacts are deterministic:
re-running a command with the same inputs reproduces them byte for byte
(manifests differ only in their timing fields).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bench import BENCH_METHODS, run_bench
from .codec import (read_confidence, read_labels, read_offsets,
                    read_point_cloud, write_confidence, write_labels,
                    write_offsets, write_point_cloud)
from .data import PanopticLabels, PointCloud, PredictionSet
from .errors import Panopt3dError
from .metrics import evaluate
from .pipeline import PipelineParams, panoptic_postprocess
from .supervision import confidence_targets, offset_loss, offset_targets
from .synth import (OracleNoise, SceneConfig, default_taxonomy, generate_scene,
                    load_scene_config, oracle_predict)
from .taxonomy import ClassTaxonomy

# Oracle predictions draw from an independent stream so prediction noise
# never correlates with scene geometry sampled from the same base seed.
ORACLE_SEED_OFFSET = 1 << 32

FORMATS = ("table", "json", "csv")
SWEEP_PARAMS = ("d", "delta", "sigma")


# ---------------------------------------------------------------------------
# shared plumbing


def _write_json(path: Path, data: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _write_manifest(path: Path, command: str, parameters: dict, inputs: list,
                    outputs: list, timings_ms: dict, seed: int | None = None) -> None:
    _write_json(path, {
        "tool": "panopt3d",
        "version": __version__,
        "command": command,
        "parameters": parameters,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "seed": seed,
        "timings_ms": {k: round(float(v), 3) for k, v in timings_ms.items()},
    })


def _load_taxonomy(args) -> ClassTaxonomy:
    """Resolve the taxonomy: explicit flag, a file next to the inputs, or default."""
    if getattr(args, "taxonomy", None):
        return ClassTaxonomy.load(args.taxonomy)
    for attr in ("scans", "gt", "pred", "preds"):
        root = getattr(args, attr, None)
        if root is None:
            continue
        for cand in (Path(root) / "taxonomy.json", Path(root).parent / "taxonomy.json"):
            if cand.is_file():
                return ClassTaxonomy.load(cand)
    return default_taxonomy()


def _params_from_args(args) -> PipelineParams:
    base = PipelineParams()
    return PipelineParams(
        d=args.d if args.d is not None else base.d,
        delta=args.delta if args.delta is not None else base.delta,
    )


def _stems(directory: Path, suffix: str) -> list[str]:
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    return sorted(p.stem for p in directory.glob(f"*{suffix}"))


def _read_predictions(preds_dir: Path, stem: str, n: int) -> PredictionSet:
    semantic = read_labels(preds_dir / f"{stem}.label").semantic
    offsets = read_offsets(preds_dir / f"{stem}.off")
    confidence = read_confidence(preds_dir / f"{stem}.conf")
    if not (len(semantic) == len(offsets) == len(confidence) == n):
        raise ValueError(
            f"prediction arrays for {stem!r} disagree with the scan length {n}")
    return PredictionSet(semantic=semantic, offsets=offsets, confidence=confidence)


# ---------------------------------------------------------------------------
# synth


def _synth_one(job: tuple) -> tuple[str, int, float]:
    out, stem, scene_json, noise_json, tax_json, seed = job
    scene = SceneConfig.from_json_dict(scene_json).with_seed(seed)
    noise = OracleNoise.from_json_dict(noise_json)
    taxonomy = ClassTaxonomy.from_json_dict(tax_json)
    t0 = time.perf_counter()
    cloud, labels = generate_scene(scene, taxonomy)
    preds = oracle_predict(cloud, labels, taxonomy, noise,
                           seed=seed + ORACLE_SEED_OFFSET)
    out = Path(out)
    write_point_cloud(out / "scans" / f"{stem}.bin", cloud)
    write_labels(out / "scans" / f"{stem}.label", labels)
    write_labels(out / "preds" / f"{stem}.label",
                 PanopticLabels(semantic=preds.semantic,
                                instance=np.zeros(len(cloud), dtype=np.uint32)))
    write_offsets(out / "preds" / f"{stem}.off", preds.offsets)
    write_confidence(out / "preds" / f"{stem}.conf", preds.confidence)
    return stem, len(cloud), (time.perf_counter() - t0) * 1e3


def cmd_synth(args) -> int:
    t_start = time.perf_counter()
    if args.config:
        scene, noise, taxonomy = load_scene_config(args.config)
    else:
        scene, noise, taxonomy = SceneConfig(), OracleNoise(), default_taxonomy()
    if args.taxonomy:
        taxonomy = ClassTaxonomy.load(args.taxonomy)
    if args.sigma is not None:
        noise = OracleNoise(offset_sigma=noise.offset_sigma,
                            semantic_flip_prob=noise.semantic_flip_prob,
                            confidence_sigma=args.sigma,
                            offset_clip=noise.offset_clip)
    base_seed = args.seed if args.seed is not None else scene.seed
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    jobs = [(str(out), f"{i:06d}", scene.to_json_dict(), noise.to_json_dict(),
             taxonomy.to_json_dict(), base_seed + i) for i in range(args.count)]
    results: list[tuple[str, int, float]] = []
    if args.count:
        (out / "scans").mkdir(exist_ok=True)
        (out / "preds").mkdir(exist_ok=True)
        taxonomy.save(out / "taxonomy.json")
        if args.workers > 1:
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                results = list(pool.map(_synth_one, jobs))
        else:
            results = [_synth_one(job) for job in jobs]
    results.sort(key=lambda r: r[0])

    outputs = ([str(out / "taxonomy.json")] if args.count else [])
    outputs += [str(out / "scans" / f"{stem}.{ext}")
                for stem, _, _ in results for ext in ("bin", "label")]
    outputs += [str(out / "preds" / f"{stem}.{ext}")
                for stem, _, _ in results for ext in ("label", "off", "conf")]
    timings = {f"scene_{stem}": ms for stem, _, ms in results}
    timings["total"] = (time.perf_counter() - t_start) * 1e3
    _write_manifest(out / "manifest.json", "synth",
                    parameters={"count": args.count, "workers": args.workers,
                                "scene": scene.to_json_dict(),
                                "noise": noise.to_json_dict()},
                    inputs=[args.config] if args.config else [],
                    outputs=outputs, timings_ms=timings, seed=base_seed)
    total_points = sum(n for _, n, _ in results)
    print(f"wrote {args.count} scan(s), {total_points} points -> {out}")
    return 0


# ---------------------------------------------------------------------------
# segment


def _segment_one(job: tuple) -> tuple[str, dict, int]:
    scans, preds, out, stem, params_json, tax_json, method = job
    params = PipelineParams.from_json_dict(params_json)
    taxonomy = ClassTaxonomy.from_json_dict(tax_json)
    cloud = read_point_cloud(Path(scans) / f"{stem}.bin")
    pred = _read_predictions(Path(preds), stem, len(cloud))
    result = panoptic_postprocess(cloud, pred, taxonomy, params,
                                  dedup_method=method)
    write_labels(Path(out) / f"{stem}.label", result.labels)
    return stem, result.stage_ms, len(result.kept_centers.indices)


def cmd_segment(args) -> int:
    t_start = time.perf_counter()
    taxonomy = _load_taxonomy(args)
    params = _params_from_args(args)
    scans_dir, preds_dir, out = Path(args.scans), Path(args.preds), Path(args.out)
    stems = _stems(scans_dir, ".bin")
    if not stems:
        raise FileNotFoundError(f"no .bin scans under {scans_dir}")
    out.mkdir(parents=True, exist_ok=True)

    jobs = [(str(scans_dir), str(preds_dir), str(out), stem,
             params.to_json_dict(), taxonomy.to_json_dict(), args.method)
            for stem in stems]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_segment_one, jobs))
    else:
        results = [_segment_one(job) for job in jobs]
    results.sort(key=lambda r: r[0])

    stage_totals: dict[str, float] = {}
    for _, stage_ms, _ in results:
        for k, v in stage_ms.items():
            stage_totals[k] = stage_totals.get(k, 0.0) + v
    timings = {f"stage_{k}": v for k, v in stage_totals.items()}
    timings["total"] = (time.perf_counter() - t_start) * 1e3
    _write_manifest(out / "manifest.json", "segment",
                    parameters={"params": params.to_json_dict(),
                                "method": args.method, "workers": args.workers},
                    inputs=[scans_dir, preds_dir],
                    outputs=[str(out / f"{stem}.label") for stem, _, _ in results],
                    timings_ms=timings, seed=args.seed)
    n_instances = sum(k for _, _, k in results)
    print(f"segmented {len(results)} scan(s), {n_instances} instance(s) -> {out}")
    return 0


# ---------------------------------------------------------------------------
# eval


def _report_csv(report) -> str:
    buf = []
    data = report.to_json_dict()
    fields = ["name", "id", "kind", "present", "pq", "sq", "rq", "iou",
              "tp", "fp", "fn"]
    buf.append(",".join(fields))
    for name, row in data["classes"].items():
        buf.append(",".join(str(v) for v in (
            name, row["id"], row["kind"], row["present"],
            f"{row['pq']:.6f}", f"{row['sq']:.6f}", f"{row['rq']:.6f}",
            f"{row['iou']:.6f}", row["tp"], row["fp"], row["fn"])))
    agg = data["aggregates"]
    buf.append(",".join(str(v) for v in (
        "all", "", "", "", f"{agg['pq']:.6f}", f"{agg['sq']:.6f}",
        f"{agg['rq']:.6f}", f"{agg['miou']:.6f}", "", "", "")))
    return "\n".join(buf)


def _print_report(report, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(report.to_json_dict(), indent=2, sort_keys=True))
    elif fmt == "csv":
        print(_report_csv(report))
    else:
        print(report.table())


def cmd_eval(args) -> int:
    t_start = time.perf_counter()
    taxonomy = _load_taxonomy(args)
    gt_dir, pred_dir = Path(args.gt), Path(args.pred)
    stems = _stems(gt_dir, ".label")
    if not stems:
        raise FileNotFoundError(f"no .label files under {gt_dir}")
    pairs = []
    for stem in stems:
        pred_path = pred_dir / f"{stem}.label"
        if not pred_path.is_file():
            raise FileNotFoundError(f"missing prediction for scan {stem!r}: {pred_path}")
        pairs.append((read_labels(gt_dir / f"{stem}.label"), read_labels(pred_path)))
    report = evaluate(pairs, taxonomy, min_points=args.min_points)

    report_path = Path(args.report)
    _write_json(report_path, report.to_json_dict())
    manifest_path = report_path.with_name(report_path.stem + ".manifest.json")
    _write_manifest(manifest_path, "eval",
                    parameters={"min_points": args.min_points},
                    inputs=[gt_dir, pred_dir], outputs=[report_path],
                    timings_ms={"total": (time.perf_counter() - t_start) * 1e3},
                    seed=None)
    _print_report(report, args.format)
    return 0


# ---------------------------------------------------------------------------
# targets


def cmd_targets(args) -> int:
    t_start = time.perf_counter()
    taxonomy = _load_taxonomy(args)
    sigma = args.sigma if args.sigma is not None else 1.0
    scans_dir, out = Path(args.scans), Path(args.out)
    stems = _stems(scans_dir, ".bin")
    if not stems:
        raise FileNotFoundError(f"no .bin scans under {scans_dir}")
    out.mkdir(parents=True, exist_ok=True)

    outputs = []
    for stem in stems:
        cloud = read_point_cloud(scans_dir / f"{stem}.bin")
        labels = read_labels(scans_dir / f"{stem}.label")
        targets = offset_targets(cloud, labels, taxonomy)
        if args.pred_offsets:
            pred = read_offsets(Path(args.pred_offsets) / f"{stem}.off")
            per_point = offset_loss(pred, targets).per_point
        else:  # zero-error reference: things points get confidence exactly 1
            per_point = np.zeros(len(cloud), dtype=np.float64)
        conf = confidence_targets(per_point, targets.things_mask, sigma)
        write_offsets(out / f"{stem}.off", targets.targets)
        write_confidence(out / f"{stem}.conf", conf)
        outputs += [str(out / f"{stem}.off"), str(out / f"{stem}.conf")]

    _write_manifest(out / "manifest.json", "targets",
                    parameters={"sigma": sigma,
                                "pred_offsets": args.pred_offsets or None},
                    inputs=[scans_dir] + ([args.pred_offsets] if args.pred_offsets else []),
                    outputs=outputs,
                    timings_ms={"total": (time.perf_counter() - t_start) * 1e3},
                    seed=None)
    print(f"wrote supervision targets for {len(stems)} scan(s) -> {out}")
    return 0


# ---------------------------------------------------------------------------
# bench


def cmd_bench(args) -> int:
    t_start = time.perf_counter()
    taxonomy = _load_taxonomy(args)
    params = _params_from_args(args)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    for method in methods:
        if method not in BENCH_METHODS:
            raise ValueError(f"unknown bench method {method!r}; "
                             f"expected one of {BENCH_METHODS}")
    scans_dir, preds_dir = Path(args.scans), Path(args.preds)
    stems = _stems(scans_dir, ".bin")
    if not stems:
        raise FileNotFoundError(f"no .bin scans under {scans_dir}")
    scans = []
    for stem in stems:
        cloud = read_point_cloud(scans_dir / f"{stem}.bin")
        pred = _read_predictions(preds_dir, stem, len(cloud))
        gt_path = scans_dir / f"{stem}.label"
        gt = read_labels(gt_path) if gt_path.is_file() else None
        scans.append((cloud, pred, gt))

    results = run_bench(scans, taxonomy, params, methods, repeats=args.repeats)

    out_path = Path(args.out)
    _write_json(out_path, {"methods": results,
                           "params": params.to_json_dict(),
                           "n_scans": len(scans), "repeats": args.repeats})
    manifest_path = out_path.with_name(out_path.stem + ".manifest.json")
    _write_manifest(manifest_path, "bench",
                    parameters={"methods": list(methods), "repeats": args.repeats,
                                "params": params.to_json_dict()},
                    inputs=[scans_dir, preds_dir], outputs=[out_path],
                    timings_ms={"total": (time.perf_counter() - t_start) * 1e3},
                    seed=None)

    if args.format == "json":
        print(json.dumps(results, indent=2, sort_keys=True))
    else:
        head = f"{'method':<16}{'median_ms':>12}{'p95_ms':>12}{'PQ':>8}{'runs':>6}"
        print(head)
        print("-" * len(head))
        for method in methods:
            r = results[method]
            pq = f"{r['pq']:.1f}" if r["pq"] is not None else "-"
            print(f"{method:<16}{r['median_ms']:>12.2f}{r['p95_ms']:>12.2f}"
                  f"{pq:>8}{r['runs']:>6}")
    return 0


# ---------------------------------------------------------------------------
# sweep


def _parse_values(text: str) -> list[float]:
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ValueError("no sweep values given")
    return values


def cmd_sweep(args) -> int:
    t_start = time.perf_counter()
    if args.config:
        scene, noise, taxonomy = load_scene_config(args.config)
    else:
        scene, noise, taxonomy = SceneConfig(), OracleNoise(), default_taxonomy()
    if args.taxonomy:
        taxonomy = ClassTaxonomy.load(args.taxonomy)
    base_seed = args.seed if args.seed is not None else scene.seed
    values = _parse_values(args.values)
    base_params = _params_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    # scene geometry is fixed across the sweep; only the swept knob moves
    scenes = []
    for i in range(args.count):
        cfg = scene.with_seed(base_seed + i)
        cloud, labels = generate_scene(cfg, taxonomy)
        scenes.append((cloud, labels, base_seed + i + ORACLE_SEED_OFFSET))

    def predictions(conf_sigma: float) -> list[PredictionSet]:
        nz = OracleNoise(offset_sigma=noise.offset_sigma,
                         semantic_flip_prob=noise.semantic_flip_prob,
                         confidence_sigma=conf_sigma,
                         offset_clip=noise.offset_clip)
        return [oracle_predict(cloud, labels, taxonomy, nz, seed=s)
                for cloud, labels, s in scenes]

    base_preds = predictions(noise.confidence_sigma)
    class_names = [taxonomy.name_of(c) for c in taxonomy.class_ids]
    rows = []
    for value in values:
        params = base_params
        preds = base_preds
        if args.param == "d":
            params = PipelineParams(d=value, delta=base_params.delta,
                                    majority_vote=base_params.majority_vote)
        elif args.param == "delta":
            params = PipelineParams(d=base_params.d, delta=value,
                                    majority_vote=base_params.majority_vote)
        else:  # sigma reshapes the oracle confidences themselves
            preds = predictions(value)
        pairs = []
        for (cloud, labels, _), pred in zip(scenes, preds):
            result = panoptic_postprocess(cloud, pred, taxonomy, params)
            pairs.append((labels, result.labels))
        report = evaluate(pairs, taxonomy)
        row = {"value": value, "pq": report.pq * 100.0,
               "sq": report.sq * 100.0, "rq": report.rq * 100.0,
               "miou": report.miou * 100.0}
        for cid, name in zip(taxonomy.class_ids, class_names):
            row[f"pq_{name}"] = report.per_class[cid].pq * 100.0
        rows.append(row)

    csv_path = out / "sweep.csv"
    fields = (["value", "pq", "sq", "rq", "miou"]
              + [f"pq_{name}" for name in class_names])
    with csv_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v)
                             for k, v in row.items()})

    _write_manifest(out / "manifest.json", "sweep",
                    parameters={"param": args.param, "values": values,
                                "count": args.count,
                                "base_params": base_params.to_json_dict(),
                                "scene": scene.to_json_dict(),
                                "noise": noise.to_json_dict()},
                    inputs=[args.config] if args.config else [],
                    outputs=[csv_path],
                    timings_ms={"total": (time.perf_counter() - t_start) * 1e3},
                    seed=base_seed)
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        print(f"{args.param:>8}{'PQ':>10}")
        print("-" * 18)
        for row in rows:
            print(f"{row['value']:>8.3f}{row['pq']:>10.2f}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="panopt3d",
        description="Panoptic segmentation post-processing for 3-D point clouds.")
    parser.add_argument("--version", action="version",
                        version=f"panopt3d {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="base random seed (overrides config files)")
    common.add_argument("--workers", type=int, default=1,
                        help="parallel worker processes")
    common.add_argument("--d", type=float, default=None,
                        help="center deduplication distance (meters)")
    common.add_argument("--delta", type=float, default=None,
                        help="confidence gate threshold for the gated shift")
    common.add_argument("--sigma", type=float, default=None,
                        help="confidence kernel width")
    common.add_argument("--taxonomy", type=str, default=None,
                        help="path to a taxonomy JSON file")
    common.add_argument("--format", choices=FORMATS, default="table",
                        help="stdout format for reports")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common],
                       help="generate synthetic scans + oracle predictions")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--count", type=int, default=1, help="number of scans")
    p.add_argument("--config", type=str, default=None,
                   help="scene/noise/taxonomy bundle JSON")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("segment", parents=[common],
                       help="run panoptic post-processing over scans")
    p.add_argument("--scans", required=True, help="directory of .bin scans")
    p.add_argument("--preds", required=True,
                   help="directory of .label/.off/.conf predictions")
    p.add_argument("--out", required=True, help="output directory for .label files")
    p.add_argument("--method", choices=("grid", "bruteforce"), default="grid",
                   help="center deduplication back end")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("eval", parents=[common],
                       help="score predicted labels against ground truth")
    p.add_argument("--gt", required=True, help="directory of ground-truth .label files")
    p.add_argument("--pred", required=True, help="directory of predicted .label files")
    p.add_argument("--report", required=True, help="output report JSON path")
    p.add_argument("--min-points", type=int, default=0,
                   help="ignore unmatched segments smaller than this")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("targets", parents=[common],
                       help="derive supervision targets from ground truth")
    p.add_argument("--scans", required=True,
                   help="directory of .bin scans with .label ground truth")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--pred-offsets", type=str, default=None,
                   help="optional directory of predicted .off files; confidences "
                        "are then calibrated against the actual offset errors")
    p.set_defaults(func=cmd_targets)

    p = sub.add_parser("bench", parents=[common],
                       help="benchmark the clustering back ends")
    p.add_argument("--scans", required=True, help="directory of .bin scans")
    p.add_argument("--preds", required=True, help="directory of predictions")
    p.add_argument("--out", required=True, help="output results JSON path")
    p.add_argument("--methods", default=",".join(BENCH_METHODS),
                   help="comma-separated method list")
    p.add_argument("--repeats", type=int, default=3, help="timed passes per scan")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", parents=[common],
                       help="sweep one parameter across segment + eval")
    p.add_argument("--param", choices=SWEEP_PARAMS, required=True,
                   help="which parameter to sweep")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--count", type=int, default=8, help="scans per sweep point")
    p.add_argument("--config", type=str, default=None,
                   help="scene/noise/taxonomy bundle JSON")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (Panopt3dError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
