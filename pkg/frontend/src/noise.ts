/** Seeded salt-and-pepper noise over a fraction of each image's pixels. */

import { CHANNELS, IMAGE_SIZE, PIXELS } from "./cifar.js";
import { Rng } from "./rng.js";

/**
 * Corrupt `fraction` of the spatial pixels of every image, setting all
 * channels of a hit pixel to 0 or 1 with equal probability.  Returns a new
 * buffer; the input is untouched.  fraction 0 is the identity.
 */
export function saltAndPepper(
  images: Float32Array,
  fraction = 0.5,
  seed = 42,
): Float32Array {
  if (!(fraction >= 0 && fraction <= 1)) {
    throw new Error(`noise fraction must be in [0, 1], got ${fraction}`);
  }
  if (images.length % PIXELS !== 0) {
    throw new Error(`image buffer length ${images.length} is not a multiple of ${PIXELS}`);
  }
  const out = images.slice();
  if (fraction === 0) {
    return out;
  }
  const rng = new Rng(seed);
  const count = images.length / PIXELS;
  const spatial = IMAGE_SIZE * IMAGE_SIZE;
  const hits = Math.round(fraction * spatial);
  const positions = Array.from({ length: spatial }, (_, i) => i);
  for (let img = 0; img < count; img++) {
    rng.shuffle(positions);
    for (let k = 0; k < hits; k++) {
      const value = rng.uniform() < 0.5 ? 0 : 1;
      const base = img * PIXELS + positions[k] * CHANNELS;
      for (let c = 0; c < CHANNELS; c++) {
        out[base + c] = value;
      }
    }
  }
  return out;
}
