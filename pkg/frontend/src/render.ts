/**
 * Grid sheets of reconstructions.  Feature rows decode through the decoder
 * into 32x32 images laid out in a fixed-column grid; rows flagged as
 * rejected render as black squares.
 */

import * as tf from "@tensorflow/tfjs";

import { CHANNELS, IMAGE_SIZE, PIXELS } from "./cifar.js";
import { encodePng } from "./png.js";
import { FeatureMatrix, REJECTED_LABEL } from "./wire.js";

export interface SheetOptions {
  columns: number;
  pad?: number; // pixels between cells, white
}

/** Lay out images (null = black square) into one RGB sheet. */
export function assembleSheet(
  cells: (Float32Array | null)[],
  options: SheetOptions,
): { rgb: Uint8Array; width: number; height: number } {
  const pad = options.pad ?? 2;
  const columns = options.columns;
  if (columns < 1) {
    throw new Error(`columns must be >= 1, got ${columns}`);
  }
  const rows = Math.ceil(cells.length / columns);
  const width = columns * IMAGE_SIZE + (columns + 1) * pad;
  const height = rows * IMAGE_SIZE + (rows + 1) * pad;
  const rgb = new Uint8Array(width * height * 3).fill(255);

  cells.forEach((cell, index) => {
    const row = Math.floor(index / columns);
    const col = index % columns;
    const top = pad + row * (IMAGE_SIZE + pad);
    const left = pad + col * (IMAGE_SIZE + pad);
    for (let y = 0; y < IMAGE_SIZE; y++) {
      for (let x = 0; x < IMAGE_SIZE; x++) {
        const dst = ((top + y) * width + left + x) * 3;
        if (cell === null) {
          rgb[dst] = rgb[dst + 1] = rgb[dst + 2] = 0;
          continue;
        }
        const src = (y * IMAGE_SIZE + x) * CHANNELS;
        for (let c = 0; c < 3; c++) {
          const value = Math.round(255 * Math.min(1, Math.max(0, cell[src + c])));
          rgb[dst + c] = value;
        }
      }
    }
  });
  return { rgb, width, height };
}

/** Decode latent feature rows to images through the decoder, batched. */
export function decodeFeatureRows(
  decoder: tf.LayersModel,
  features: FeatureMatrix,
): Float32Array[] {
  const images = tf.tidy(() => {
    const x = tf.tensor2d(features.data, [features.count, features.n]);
    return decoder.predict(x) as tf.Tensor4D;
  });
  const flat = images.dataSync() as Float32Array;
  images.dispose();
  const out: Float32Array[] = [];
  for (let i = 0; i < features.count; i++) {
    out.push(flat.slice(i * PIXELS, (i + 1) * PIXELS));
  }
  return out;
}

/**
 * Render a feature file to a PNG sheet.  Width-3072 rows are treated as
 * raw images; anything narrower decodes through the decoder, which is then
 * required.  ``flags[i] == 0xFFFF`` blacks out cell i.
 */
export function renderGrid(
  features: FeatureMatrix,
  options: SheetOptions & {
    decoder?: tf.LayersModel;
    flags?: Uint16Array;
  },
): Buffer {
  const { decoder, flags } = options;
  if (flags && flags.length !== features.count) {
    throw new Error(
      `flag count ${flags.length} != feature rows ${features.count}`,
    );
  }
  let cells: (Float32Array | null)[];
  if (features.n === PIXELS) {
    cells = [];
    for (let i = 0; i < features.count; i++) {
      cells.push(features.data.slice(i * PIXELS, (i + 1) * PIXELS));
    }
  } else {
    if (!decoder) {
      throw new Error(
        `feature width ${features.n} needs a decoder (raw images are ${PIXELS})`,
      );
    }
    cells = decodeFeatureRows(decoder, features);
  }
  if (flags) {
    cells = cells.map((cell, i) => (flags[i] === REJECTED_LABEL ? null : cell));
  }
  const sheet = assembleSheet(cells, options);
  return encodePng(sheet.rgb, sheet.width, sheet.height);
}
