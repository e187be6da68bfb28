/**
 * Binary codecs for the panopt3d on-disk formats.
 *
 * All formats are little-endian and densely packed:
 *
 * - `.label` — one uint32 per point; bits 0..15 hold the semantic class id,
 *   bits 16..31 hold the instance id.
 * - `.bin` — four float32 per point: x, y, z, intensity.
 * - `.off` — three float32 per point: the predicted offset vector.
 * - `.conf` — one float32 per point: the predicted center confidence.
 *
 * Decoders return typed-array views over the file bytes when the buffer is
 * suitably aligned and the host is little-endian, and fall back to a copy
 * otherwise, so callers always get a correctly ordered typed array.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { endianness } from "node:os";

const LITTLE_ENDIAN = endianness() === "LE";

/** Semantic and instance labels for a scan, one entry per point. */
export interface PanopticLabels {
  semantic: Uint32Array;
  instance: Uint32Array;
}

/** A point cloud: flat xyz coordinates plus per-point intensity. */
export interface PointCloudData {
  /** Length 3N: x0, y0, z0, x1, ... */
  coords: Float32Array;
  /** Length N. */
  intensity: Float32Array;
}

/** Raised when file bytes cannot be interpreted as the requested format. */
export class CodecError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "CodecError";
  }
}

function checkLength(byteLength: number, stride: number, what: string): void {
  if (byteLength % stride !== 0) {
    throw new CodecError(
      `${what}: byte length ${byteLength} is not a multiple of ${stride}`,
    );
  }
}

/**
 * View `buf` as a Uint32Array without copying when alignment and host byte
 * order permit; otherwise decode via DataView into a fresh array.
 */
export function asUint32(buf: Buffer | Uint8Array): Uint32Array {
  checkLength(buf.byteLength, 4, "uint32 stream");
  const n = buf.byteLength / 4;
  if (LITTLE_ENDIAN && buf.byteOffset % 4 === 0) {
    return new Uint32Array(buf.buffer, buf.byteOffset, n);
  }
  const view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  const out = new Uint32Array(n);
  for (let i = 0; i < n; i++) out[i] = view.getUint32(i * 4, true);
  return out;
}

/**
 * View `buf` as a Float32Array without copying when alignment and host byte
 * order permit; otherwise decode via DataView into a fresh array.
 */
export function asFloat32(buf: Buffer | Uint8Array): Float32Array {
  checkLength(buf.byteLength, 4, "float32 stream");
  const n = buf.byteLength / 4;
  if (LITTLE_ENDIAN && buf.byteOffset % 4 === 0) {
    return new Float32Array(buf.buffer, buf.byteOffset, n);
  }
  const view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  const out = new Float32Array(n);
  for (let i = 0; i < n; i++) out[i] = view.getFloat32(i * 4, true);
  return out;
}

/** Serialize a typed array to little-endian bytes, copying only if needed. */
function toBytes(arr: Uint32Array | Float32Array): Uint8Array {
  if (LITTLE_ENDIAN) {
    return new Uint8Array(arr.buffer, arr.byteOffset, arr.byteLength);
  }
  const out = new Uint8Array(arr.byteLength);
  const view = new DataView(out.buffer);
  if (arr instanceof Uint32Array) {
    for (let i = 0; i < arr.length; i++) view.setUint32(i * 4, arr[i]!, true);
  } else {
    for (let i = 0; i < arr.length; i++) view.setFloat32(i * 4, arr[i]!, true);
  }
  return out;
}

/** Pack semantic/instance pairs into label words (low 16 / high 16 bits). */
export function encodeLabels(labels: PanopticLabels): Uint32Array {
  const { semantic, instance } = labels;
  if (semantic.length !== instance.length) {
    throw new CodecError(
      `semantic length ${semantic.length} != instance length ${instance.length}`,
    );
  }
  const words = new Uint32Array(semantic.length);
  for (let i = 0; i < words.length; i++) {
    const sem = semantic[i]!;
    const inst = instance[i]!;
    if (sem > 0xffff) throw new CodecError(`semantic id ${sem} exceeds 16 bits`);
    if (inst > 0xffff) throw new CodecError(`instance id ${inst} exceeds 16 bits`);
    // >>> 0 keeps the word an unsigned 32-bit value after the shift.
    words[i] = ((inst << 16) | sem) >>> 0;
  }
  return words;
}

/** Unpack label words into semantic (low 16 bits) and instance (high 16). */
export function decodeLabels(words: Uint32Array): PanopticLabels {
  const semantic = new Uint32Array(words.length);
  const instance = new Uint32Array(words.length);
  for (let i = 0; i < words.length; i++) {
    const w = words[i]!;
    semantic[i] = w & 0xffff;
    instance[i] = w >>> 16;
  }
  return { semantic, instance };
}

/** Read a `.label` file into semantic/instance arrays. */
export function readLabels(path: string): PanopticLabels {
  return decodeLabels(asUint32(readFileSync(path)));
}

/** Write semantic/instance arrays as a `.label` file. */
export function writeLabels(path: string, labels: PanopticLabels): void {
  writeFileSync(path, toBytes(encodeLabels(labels)));
}

/** Read a `.bin` point-cloud file (x, y, z, intensity quadruples). */
export function readPointCloud(path: string): PointCloudData {
  const flat = asFloat32(readFileSync(path));
  checkLength(flat.byteLength, 16, path);
  const n = flat.length / 4;
  const coords = new Float32Array(n * 3);
  const intensity = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    coords[i * 3] = flat[i * 4]!;
    coords[i * 3 + 1] = flat[i * 4 + 1]!;
    coords[i * 3 + 2] = flat[i * 4 + 2]!;
    intensity[i] = flat[i * 4 + 3]!;
  }
  return { coords, intensity };
}

/** Write a point cloud as a `.bin` file (x, y, z, intensity quadruples). */
export function writePointCloud(path: string, cloud: PointCloudData): void {
  const { coords, intensity } = cloud;
  if (coords.length !== intensity.length * 3) {
    throw new CodecError(
      `coords length ${coords.length} != 3 * intensity length ${intensity.length}`,
    );
  }
  const n = intensity.length;
  const flat = new Float32Array(n * 4);
  for (let i = 0; i < n; i++) {
    flat[i * 4] = coords[i * 3]!;
    flat[i * 4 + 1] = coords[i * 3 + 1]!;
    flat[i * 4 + 2] = coords[i * 3 + 2]!;
    flat[i * 4 + 3] = intensity[i]!;
  }
  writeFileSync(path, toBytes(flat));
}

/** Read a `.off` offset file (flat xyz triples, length 3N). */
export function readOffsets(path: string): Float32Array {
  const flat = asFloat32(readFileSync(path));
  checkLength(flat.byteLength, 12, path);
  return flat;
}

/** Write per-point offsets (flat xyz triples, length 3N) as `.off`. */
export function writeOffsets(path: string, offsets: Float32Array): void {
  if (offsets.length % 3 !== 0) {
    throw new CodecError(`offsets length ${offsets.length} is not a multiple of 3`);
  }
  writeFileSync(path, toBytes(offsets));
}

/** Read a `.conf` confidence file (one float32 per point). */
export function readConfidence(path: string): Float32Array {
  return asFloat32(readFileSync(path));
}

/** Write per-point confidences as `.conf`. */
export function writeConfidence(path: string, conf: Float32Array): void {
  writeFileSync(path, toBytes(conf));
}
