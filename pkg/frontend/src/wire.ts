/**
 * The weam wire formats, byte-compatible with the Python package.
 *
 * All values little-endian:
 *   .eamf  magic EAMF, version 0x01, n uint32, count uint64,
 *          count*n float32 row-major
 *   .eaml  magic EAML, version 0x01, count uint64, count uint16 class ids;
 *          0xFFFF marks a rejected cue in predicted-label files
 *
 * Writers stage to a temp file and rename so no partial output survives a
 * failure.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export const REJECTED_LABEL = 0xffff;

const FEATURES_MAGIC = "EAMF";
const LABELS_MAGIC = "EAML";
const VERSION = 1;

export interface FeatureMatrix {
  /** row-major count x n */
  data: Float32Array;
  count: number;
  n: number;
}

function atomicWrite(filePath: string, bytes: Buffer): void {
  const dir = path.dirname(filePath) || ".";
  const tmp = path.join(dir, `.tmp-${process.pid}-${Date.now()}~`);
  try {
    fs.writeFileSync(tmp, bytes);
    fs.renameSync(tmp, filePath);
  } catch (err) {
    try {
      fs.unlinkSync(tmp);
    } catch {
      /* already gone */
    }
    throw err;
  }
}

export function encodeFeatures(matrix: FeatureMatrix): Buffer {
  const { data, count, n } = matrix;
  if (data.length !== count * n) {
    throw new Error(`feature buffer length ${data.length} != ${count}x${n}`);
  }
  for (const value of data) {
    if (!Number.isFinite(value)) {
      throw new Error("refusing to write non-finite features");
    }
  }
  const header = Buffer.alloc(4 + 1 + 4 + 8);
  header.write(FEATURES_MAGIC, 0, "ascii");
  header.writeUInt8(VERSION, 4);
  header.writeUInt32LE(n, 5);
  header.writeBigUInt64LE(BigInt(count), 9);
  const payload = Buffer.alloc(4 * count * n);
  for (let i = 0; i < data.length; i++) {
    payload.writeFloatLE(data[i], 4 * i);
  }
  return Buffer.concat([header, payload]);
}

export function writeFeatures(matrix: FeatureMatrix, filePath: string): void {
  atomicWrite(filePath, encodeFeatures(matrix));
}

export function decodeFeatures(bytes: Buffer): FeatureMatrix {
  if (bytes.length < 17) {
    throw new Error("truncated feature file: header incomplete");
  }
  const magic = bytes.toString("ascii", 0, 4);
  if (magic !== FEATURES_MAGIC) {
    throw new Error(`bad magic ${magic}, expected ${FEATURES_MAGIC}`);
  }
  if (bytes.readUInt8(4) !== VERSION) {
    throw new Error(`unsupported feature file version ${bytes.readUInt8(4)}`);
  }
  const n = bytes.readUInt32LE(5);
  const count = Number(bytes.readBigUInt64LE(9));
  if (bytes.length !== 17 + 4 * n * count) {
    throw new Error(
      `feature payload is ${bytes.length - 17} bytes, expected ${4 * n * count}`,
    );
  }
  const data = new Float32Array(count * n);
  for (let i = 0; i < data.length; i++) {
    data[i] = bytes.readFloatLE(17 + 4 * i);
  }
  return { data, count, n };
}

export function readFeatures(filePath: string): FeatureMatrix {
  return decodeFeatures(fs.readFileSync(filePath));
}

export function encodeLabels(labels: Uint16Array | number[]): Buffer {
  const values = Uint16Array.from(labels);
  const header = Buffer.alloc(4 + 1 + 8);
  header.write(LABELS_MAGIC, 0, "ascii");
  header.writeUInt8(VERSION, 4);
  header.writeBigUInt64LE(BigInt(values.length), 5);
  const payload = Buffer.alloc(2 * values.length);
  for (let i = 0; i < values.length; i++) {
    payload.writeUInt16LE(values[i], 2 * i);
  }
  return Buffer.concat([header, payload]);
}

export function writeLabels(labels: Uint16Array | number[], filePath: string): void {
  atomicWrite(filePath, encodeLabels(labels));
}

export function decodeLabels(bytes: Buffer): Uint16Array {
  if (bytes.length < 13) {
    throw new Error("truncated label file: header incomplete");
  }
  const magic = bytes.toString("ascii", 0, 4);
  if (magic !== LABELS_MAGIC) {
    throw new Error(`bad magic ${magic}, expected ${LABELS_MAGIC}`);
  }
  if (bytes.readUInt8(4) !== VERSION) {
    throw new Error(`unsupported label file version ${bytes.readUInt8(4)}`);
  }
  const count = Number(bytes.readBigUInt64LE(5));
  if (bytes.length !== 13 + 2 * count) {
    throw new Error("label payload size mismatch");
  }
  const labels = new Uint16Array(count);
  for (let i = 0; i < count; i++) {
    labels[i] = bytes.readUInt16LE(13 + 2 * i);
  }
  return labels;
}

export function readLabels(filePath: string): Uint16Array {
  return decodeLabels(fs.readFileSync(filePath));
}
