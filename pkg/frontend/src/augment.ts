/**
 * Training-time augmentation: horizontal flips, minor rotations, slight
 * zooms.  Draws are seeded so epochs are reproducible.
 */

import * as tf from "@tensorflow/tfjs";

import { Rng } from "./rng.js";

export interface AugmentOptions {
  flipProbability?: number;
  maxRotateRadians?: number; // default +-15 degrees
  maxZoom?: number;          // default +-10%
}

export function augmentBatch(
  images: tf.Tensor4D,
  rng: Rng,
  options: AugmentOptions = {},
): tf.Tensor4D {
  const flipP = options.flipProbability ?? 0.5;
  const maxRotate = options.maxRotateRadians ?? (15 * Math.PI) / 180;
  const maxZoom = options.maxZoom ?? 0.1;
  const count = images.shape[0];

  return tf.tidy(() => {
    let out = images;
    // per-batch draws keep this cheap; each batch gets its own transform
    if (rng.uniform() < flipP) {
      out = tf.image.flipLeftRight(out);
    }
    const angle = rng.range(-maxRotate, maxRotate);
    out = tf.image.rotateWithOffset(out, angle, 0.5);
    const zoom = 1 + rng.range(-maxZoom, maxZoom);
    if (zoom !== 1) {
      const half = 0.5 - 0.5 / zoom;
      const boxes = Array.from({ length: count }, () => [
        half, half, 1 - half, 1 - half,
      ]);
      out = tf.image.cropAndResize(
        out,
        tf.tensor2d(boxes, [count, 4]),
        tf.range(0, count, 1, "int32"),
        [images.shape[1], images.shape[2]],
      ) as tf.Tensor4D;
    }
    return out.clipByValue(0, 1) as tf.Tensor4D;
  });
}
