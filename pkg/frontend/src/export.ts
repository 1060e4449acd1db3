/**
 * Latent feature and label export in the memory package's wire formats.
 *
 * Exports are driven by the split manifest so the feature count and width
 * always match what the memory-side fold expects.
 */

import * as tf from "@tensorflow/tfjs";

import { FoldIndices, ImageSet, gather } from "./cifar.js";
import { REJECTED_LABEL, writeFeatures, writeLabels } from "./wire.js";

/** Encode images into latent features, batched to bound memory use. */
export function encodeImages(
  encoder: tf.LayersModel,
  set: ImageSet,
  batchSize = 256,
): Float32Array {
  const latentSize = (encoder.outputs[0].shape as number[])[1];
  const out = new Float32Array(set.count * latentSize);
  for (let start = 0; start < set.count; start += batchSize) {
    const stop = Math.min(start + batchSize, set.count);
    const latents = tf.tidy(() => {
      const batch = tf.tensor4d(
        set.images.subarray(start * 3072, stop * 3072),
        [stop - start, 32, 32, 3],
      );
      return encoder.predict(batch) as tf.Tensor2D;
    });
    out.set(latents.dataSync(), start * latentSize);
    latents.dispose();
  }
  return out;
}

export interface ExportPaths {
  features: string;
  labels: string;
}

/**
 * Export one fold subset (``training`` / ``remembered`` / ``test``) as an
 * .eamf/.eaml pair whose row order follows the manifest's index order.
 */
export function exportFold(
  encoder: tf.LayersModel,
  corpus: ImageSet,
  fold: FoldIndices,
  which: "training" | "remembered" | "test",
  paths: ExportPaths,
): { count: number; n: number } {
  const indices = fold[which];
  const subset = gather(corpus, indices);
  const latentSize = (encoder.outputs[0].shape as number[])[1];
  const data = encodeImages(encoder, subset);
  writeFeatures({ data, count: subset.count, n: latentSize }, paths.features);
  writeLabels(subset.labels, paths.labels);
  return { count: subset.count, n: latentSize };
}

/** Classifier predictions over latent rows, as a writable label vector. */
export function predictLabels(
  classifier: tf.LayersModel,
  latents: Float32Array,
  latentSize: number,
  rejectedMask?: boolean[],
): Uint16Array {
  const count = latents.length / latentSize;
  const predictions = tf.tidy(() => {
    const x = tf.tensor2d(latents, [count, latentSize]);
    const probabilities = classifier.predict(x) as tf.Tensor2D;
    return probabilities.argMax(1).dataSync();
  });
  const labels = new Uint16Array(count);
  for (let i = 0; i < count; i++) {
    labels[i] = rejectedMask && rejectedMask[i]
      ? REJECTED_LABEL
      : predictions[i];
  }
  return labels;
}
