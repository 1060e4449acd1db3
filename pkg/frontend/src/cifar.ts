/**
 * CIFAR-10 binary-format loading and fold derivation.
 *
 * The binary corpus is six files of 10,000 records each (data_batch_1..5
 * and test_batch), one record = 1 label byte + 1024 red + 1024 green +
 * 1024 blue bytes for a 32x32 image.  All 60,000 records concatenate in
 * that file order into one corpus; the memory package's split manifest
 * indexes into this canonical order.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export const IMAGE_SIZE = 32;
export const CHANNELS = 3;
export const PIXELS = IMAGE_SIZE * IMAGE_SIZE * CHANNELS; // 3072
export const CLASS_NAMES = [
  "airplane", "automobile", "bird", "cat", "deer",
  "dog", "frog", "horse", "ship", "truck",
];

const BATCH_FILES = [
  "data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin",
  "data_batch_4.bin", "data_batch_5.bin", "test_batch.bin",
];
const RECORD_BYTES = 1 + PIXELS;

export interface ImageSet {
  /** HWC float32 in [0,1], count x 3072 row-major */
  images: Float32Array;
  labels: Uint16Array;
  count: number;
}

function decodeRecords(bytes: Buffer, out: ImageSet, offset: number): number {
  if (bytes.length % RECORD_BYTES !== 0) {
    throw new Error(`batch size ${bytes.length} is not a record multiple`);
  }
  const records = bytes.length / RECORD_BYTES;
  const plane = IMAGE_SIZE * IMAGE_SIZE;
  for (let r = 0; r < records; r++) {
    const base = r * RECORD_BYTES;
    out.labels[offset + r] = bytes.readUInt8(base);
    // stored channel-planar, exposed interleaved HWC for the tensor stack
    for (let p = 0; p < plane; p++) {
      const dst = (offset + r) * PIXELS + p * CHANNELS;
      out.images[dst] = bytes.readUInt8(base + 1 + p) / 255;
      out.images[dst + 1] = bytes.readUInt8(base + 1 + plane + p) / 255;
      out.images[dst + 2] = bytes.readUInt8(base + 1 + 2 * plane + p) / 255;
    }
  }
  return records;
}

/** Load the full corpus from a directory of CIFAR-10 binary batches. */
export function loadCifarBinary(dir: string): ImageSet {
  const sizes = BATCH_FILES.map((f) => fs.statSync(path.join(dir, f)).size);
  const total = sizes.reduce((a, b) => a + b / RECORD_BYTES, 0);
  const set: ImageSet = {
    images: new Float32Array(total * PIXELS),
    labels: new Uint16Array(total),
    count: total,
  };
  let offset = 0;
  for (const file of BATCH_FILES) {
    offset += decodeRecords(fs.readFileSync(path.join(dir, file)), set, offset);
  }
  return set;
}

export interface SplitManifest {
  seed: number;
  count: number;
  order: number[];
}

export function readSplitManifest(filePath: string): SplitManifest {
  const manifest = JSON.parse(fs.readFileSync(filePath, "utf-8"));
  if (manifest.format !== "weam-split") {
    throw new Error("not a split manifest");
  }
  if (manifest.order.length !== manifest.count) {
    throw new Error("split manifest order length != count");
  }
  return manifest;
}

export interface FoldIndices {
  training: number[];
  remembered: number[];
  test: number[];
  trainingFit: number[];
  trainingVal: number[];
}

const FOLD_COUNT = 10;

/**
 * Derive one fold's index sets from the manifest order: ten chunks at
 * (k*count+5)/10 integer boundaries (matching the memory package exactly);
 * test = chunk f, remembered = the next two cyclically, training = the
 * remaining seven (80/20 fit/validation).
 */
export function foldIndices(manifest: SplitManifest, fold: number): FoldIndices {
  if (fold < 0 || fold >= FOLD_COUNT) {
    throw new Error(`fold index must be in [0, ${FOLD_COUNT - 1}], got ${fold}`);
  }
  const { count, order } = manifest;
  const bounds: number[] = [];
  for (let k = 0; k <= FOLD_COUNT; k++) {
    bounds.push(Math.floor((k * count + 5) / FOLD_COUNT));
  }
  const chunk = (k: number) => order.slice(bounds[k], bounds[k + 1]);
  const test = chunk(fold);
  const remembered = [
    ...chunk((fold + 1) % FOLD_COUNT),
    ...chunk((fold + 2) % FOLD_COUNT),
  ];
  const training: number[] = [];
  for (let k = 3; k < FOLD_COUNT; k++) {
    training.push(...chunk((fold + k) % FOLD_COUNT));
  }
  const fitCount = Math.floor((8 * training.length + 5) / 10);
  return {
    training,
    remembered,
    test,
    trainingFit: training.slice(0, fitCount),
    trainingVal: training.slice(fitCount),
  };
}

/** Gather rows of an image set by index. */
export function gather(set: ImageSet, indices: number[]): ImageSet {
  const images = new Float32Array(indices.length * PIXELS);
  const labels = new Uint16Array(indices.length);
  indices.forEach((src, dst) => {
    images.set(set.images.subarray(src * PIXELS, (src + 1) * PIXELS), dst * PIXELS);
    labels[dst] = set.labels[src];
  });
  return { images, labels, count: indices.length };
}
