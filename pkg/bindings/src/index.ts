/**
 * Typed bindings for panopt3d.
 *
 * Everything here talks to the `panopt3d` CLI through temporary directories
 * and the documented binary formats — no in-process coupling — so results are
 * exactly what the native tool produces.
 */

import { mkdtempSync, mkdirSync, readFileSync, rmSync } from "node:fs";
import { readdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { z } from "zod";

import {
  type PanopticLabels,
  type PointCloudData,
  CodecError,
  readConfidence,
  readLabels,
  readOffsets,
  writeConfidence,
  writeLabels,
  writeOffsets,
  writePointCloud,
} from "./codec.js";
import { runCli } from "./runner.js";

export * from "./codec.js";
export { CliError, cliCommand, cliVersion, runCli } from "./runner.js";

/** Per-point network predictions consumed by the post-processing step. */
export interface PredictionSet {
  /** Predicted semantic class id per point. */
  semantic: Uint32Array;
  /** Predicted center offsets, flat xyz triples (length 3N). */
  offsets: Float32Array;
  /** Predicted center confidence per point. */
  confidence: Float32Array;
}

/** Options shared by the segmentation-related bindings. */
export interface SegmentOptions {
  /** Center deduplication distance in meters. */
  d?: number;
  /** Confidence gate threshold carried alongside the other parameters. */
  delta?: number;
  /** Confidence kernel width. */
  sigma?: number;
  /** Deduplication back end. */
  method?: "grid" | "bruteforce";
  /** Taxonomy JSON path; the CLI default taxonomy is used when omitted. */
  taxonomyPath?: string;
}

export interface EvaluateOptions {
  taxonomyPath?: string;
  /** Ignore unmatched segments smaller than this many points. */
  minPoints?: number;
}

export interface TargetsOptions {
  sigma?: number;
  taxonomyPath?: string;
  /** Directory of predicted `.off` files to calibrate confidences against. */
  predOffsetsDir?: string;
}

const classRowSchema = z.object({
  id: z.number().int(),
  kind: z.enum(["things", "stuff"]),
  present: z.boolean(),
  pq: z.number(),
  sq: z.number(),
  rq: z.number(),
  iou: z.number(),
  tp: z.number().int(),
  fp: z.number().int(),
  fn: z.number().int(),
});

const reportSchema = z.object({
  n_scans: z.number().int(),
  aggregates: z.object({
    pq: z.number(),
    pq_dagger: z.number(),
    sq: z.number(),
    rq: z.number(),
    pq_things: z.number(),
    sq_things: z.number(),
    rq_things: z.number(),
    pq_stuff: z.number(),
    sq_stuff: z.number(),
    rq_stuff: z.number(),
    miou: z.number(),
  }),
  classes: z.record(z.string(), classRowSchema),
});

/** Panoptic-quality report as emitted by `panopt3d eval` (values × 100). */
export type EvalReport = z.infer<typeof reportSchema>;
export type ClassReport = z.infer<typeof classRowSchema>;

function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "panopt3d-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

function commonFlags(opts: {
  taxonomyPath?: string;
  d?: number;
  delta?: number;
  sigma?: number;
}): string[] {
  const args: string[] = [];
  if (opts.d !== undefined) args.push("--d", String(opts.d));
  if (opts.delta !== undefined) args.push("--delta", String(opts.delta));
  if (opts.sigma !== undefined) args.push("--sigma", String(opts.sigma));
  if (opts.taxonomyPath !== undefined) args.push("--taxonomy", opts.taxonomyPath);
  return args;
}

/**
 * Run panoptic post-processing on one scan: cluster predicted centers and
 * return the resulting semantic/instance labels.
 *
 * Equivalent to writing the inputs to disk and running `panopt3d segment`;
 * the returned labels are bit-identical to that CLI run.
 */
export function boundPostprocess(
  cloud: PointCloudData,
  preds: PredictionSet,
  opts: SegmentOptions = {},
): PanopticLabels {
  const n = cloud.intensity.length;
  if (preds.semantic.length !== n) {
    throw new CodecError(`semantic length ${preds.semantic.length} != ${n} points`);
  }
  if (preds.offsets.length !== n * 3) {
    throw new CodecError(`offsets length ${preds.offsets.length} != 3 * ${n} points`);
  }
  if (preds.confidence.length !== n) {
    throw new CodecError(`confidence length ${preds.confidence.length} != ${n} points`);
  }
  return withTempDir((dir) => {
    const scans = join(dir, "scans");
    const predDir = join(dir, "preds");
    const out = join(dir, "out");
    mkdirSync(scans);
    mkdirSync(predDir);
    const stem = "000000";
    writePointCloud(join(scans, `${stem}.bin`), cloud);
    writeLabels(join(predDir, `${stem}.label`), {
      semantic: preds.semantic,
      instance: new Uint32Array(n),
    });
    writeOffsets(join(predDir, `${stem}.off`), preds.offsets);
    writeConfidence(join(predDir, `${stem}.conf`), preds.confidence);
    const args = ["segment", "--scans", scans, "--preds", predDir, "--out", out];
    if (opts.method !== undefined) args.push("--method", opts.method);
    args.push(...commonFlags(opts));
    runCli(args);
    return readLabels(join(out, `${stem}.label`));
  });
}

/**
 * Score predicted `.label` files against ground truth with `panopt3d eval`
 * and return the parsed report (all quality values scaled by 100).
 */
export function boundEvaluate(
  gtDir: string,
  predDir: string,
  opts: EvaluateOptions = {},
): EvalReport {
  return withTempDir((dir) => {
    const reportPath = join(dir, "report.json");
    const args = ["eval", "--gt", gtDir, "--pred", predDir, "--report", reportPath];
    if (opts.minPoints !== undefined) args.push("--min-points", String(opts.minPoints));
    if (opts.taxonomyPath !== undefined) args.push("--taxonomy", opts.taxonomyPath);
    runCli(args);
    return reportSchema.parse(JSON.parse(readFileSync(reportPath, "utf8")));
  });
}

/** Supervision targets for one scan, as produced by `panopt3d targets`. */
export interface ScanTargets {
  stem: string;
  /** Ground-truth center offsets, flat xyz triples (length 3N). */
  offsets: Float32Array;
  /** Confidence targets in [0, 1], one per point. */
  confidence: Float32Array;
}

/**
 * Derive supervision targets (`.off` + `.conf`) from the ground-truth labels
 * of every scan in `scansDir`, returned per stem in sorted order.
 */
export function boundSupervisionTargets(
  scansDir: string,
  opts: TargetsOptions = {},
): ScanTargets[] {
  return withTempDir((dir) => {
    const out = join(dir, "targets");
    const args = ["targets", "--scans", scansDir, "--out", out];
    if (opts.sigma !== undefined) args.push("--sigma", String(opts.sigma));
    if (opts.taxonomyPath !== undefined) args.push("--taxonomy", opts.taxonomyPath);
    if (opts.predOffsetsDir !== undefined) {
      args.push("--pred-offsets", opts.predOffsetsDir);
    }
    runCli(args);
    const stems = readdirSync(out)
      .filter((f) => f.endsWith(".off"))
      .map((f) => f.slice(0, -4))
      .sort();
    return stems.map((stem) => ({
      stem,
      offsets: readOffsets(join(out, `${stem}.off`)),
      confidence: readConfidence(join(out, `${stem}.conf`)),
    }));
  });
}
