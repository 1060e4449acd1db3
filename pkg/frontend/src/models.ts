/**
 * The convolutional autoencoder and the latent-space classifier.
 *
 * The encoder compresses 32x32x3 images through conv + max-pooling stages
 * into an 8x8 bottleneck whose channel count sets the latent width n
 * (n/64 channels), flattened to the feature vector the memory stores.
 * The decoder mirrors it with conv + upsampling back to 32x32x3.  ReLU
 * activations throughout, sigmoid output, RMSE as the autoencoder metric.
 *
 * The classifier consumes the latent vector reshaped back to 8x8 maps:
 * conv + max-pooling + dropout stages, then fully connected layers, with
 * batch normalization and L2 weight decay to curb overfitting.
 */

import * as tf from "@tensorflow/tfjs";

export const LATENT_SIZES = [64, 128, 256, 512, 1024];
export const NUM_CLASSES = 10;
const BOTTLENECK = 8; // spatial side after two 2x pools

export interface AutoencoderParts {
  autoencoder: tf.LayersModel;
  encoder: tf.LayersModel;
  decoder: tf.LayersModel;
}

export interface ModelOptions {
  /** filters of the first conv stage; the real runs use 32 */
  baseFilters?: number;
  /** L2 weight decay for the classifier */
  weightDecay?: number;
}

function checkLatentSize(n: number): void {
  if (!LATENT_SIZES.includes(n)) {
    throw new Error(`latent size must be one of ${LATENT_SIZES.join(", ")}, got ${n}`);
  }
}

export function buildAutoencoder(
  latentSize: number,
  options: ModelOptions = {},
): AutoencoderParts {
  checkLatentSize(latentSize);
  const filters = options.baseFilters ?? 32;
  const latentChannels = latentSize / (BOTTLENECK * BOTTLENECK);

  const input = tf.input({ shape: [32, 32, 3] });
  let x = tf.layers
    .conv2d({ filters, kernelSize: 3, padding: "same", activation: "relu" })
    .apply(input) as tf.SymbolicTensor;
  x = tf.layers.maxPooling2d({ poolSize: 2 }).apply(x) as tf.SymbolicTensor;
  x = tf.layers
    .conv2d({ filters: filters * 2, kernelSize: 3, padding: "same", activation: "relu" })
    .apply(x) as tf.SymbolicTensor;
  x = tf.layers.maxPooling2d({ poolSize: 2 }).apply(x) as tf.SymbolicTensor;
  x = tf.layers
    .conv2d({ filters: latentChannels, kernelSize: 3, padding: "same", activation: "relu" })
    .apply(x) as tf.SymbolicTensor;
  const latent = tf.layers.flatten({ name: "latent" }).apply(x) as tf.SymbolicTensor;
  const encoder = tf.model({ inputs: input, outputs: latent, name: "encoder" });

  const latentInput = tf.input({ shape: [latentSize] });
  let y = tf.layers
    .reshape({ targetShape: [BOTTLENECK, BOTTLENECK, latentChannels] })
    .apply(latentInput) as tf.SymbolicTensor;
  y = tf.layers
    .conv2d({ filters: filters * 2, kernelSize: 3, padding: "same", activation: "relu" })
    .apply(y) as tf.SymbolicTensor;
  y = tf.layers.upSampling2d({ size: [2, 2] }).apply(y) as tf.SymbolicTensor;
  y = tf.layers
    .conv2d({ filters, kernelSize: 3, padding: "same", activation: "relu" })
    .apply(y) as tf.SymbolicTensor;
  y = tf.layers.upSampling2d({ size: [2, 2] }).apply(y) as tf.SymbolicTensor;
  const reconstruction = tf.layers
    .conv2d({ filters: 3, kernelSize: 3, padding: "same", activation: "sigmoid" })
    .apply(y) as tf.SymbolicTensor;
  const decoder = tf.model({ inputs: latentInput, outputs: reconstruction, name: "decoder" });

  const output = decoder.apply(encoder.apply(input)) as tf.SymbolicTensor;
  const autoencoder = tf.model({ inputs: input, outputs: output, name: "autoencoder" });
  autoencoder.compile({ optimizer: tf.train.adam(), loss: "meanSquaredError" });
  return { autoencoder, encoder, decoder };
}

export function buildClassifier(
  latentSize: number,
  options: ModelOptions = {},
): tf.LayersModel {
  checkLatentSize(latentSize);
  const filters = options.baseFilters ?? 32;
  const decay = options.weightDecay ?? 1e-4;
  const latentChannels = latentSize / (BOTTLENECK * BOTTLENECK);
  const regularizer = tf.regularizers.l2({ l2: decay });

  const model = tf.sequential({ name: "classifier" });
  model.add(tf.layers.reshape({
    targetShape: [BOTTLENECK, BOTTLENECK, latentChannels],
    inputShape: [latentSize],
  }));
  model.add(tf.layers.conv2d({
    filters: filters * 2, kernelSize: 3, padding: "same",
    activation: "relu", kernelRegularizer: regularizer,
  }));
  model.add(tf.layers.batchNormalization());
  model.add(tf.layers.maxPooling2d({ poolSize: 2 }));
  model.add(tf.layers.dropout({ rate: 0.25 }));
  model.add(tf.layers.conv2d({
    filters: filters * 4, kernelSize: 3, padding: "same",
    activation: "relu", kernelRegularizer: regularizer,
  }));
  model.add(tf.layers.batchNormalization());
  model.add(tf.layers.maxPooling2d({ poolSize: 2 }));
  model.add(tf.layers.dropout({ rate: 0.25 }));
  model.add(tf.layers.flatten());
  model.add(tf.layers.dense({
    units: filters * 8, activation: "relu", kernelRegularizer: regularizer,
  }));
  model.add(tf.layers.batchNormalization());
  model.add(tf.layers.dropout({ rate: 0.5 }));
  model.add(tf.layers.dense({ units: NUM_CLASSES, activation: "softmax" }));
  model.compile({
    optimizer: tf.train.adam(),
    loss: "sparseCategoricalCrossentropy",
    metrics: ["accuracy"],
  });
  return model;
}

/** Root-mean-squared reconstruction error as a percentage of full scale. */
export function scaledRmse(images: tf.Tensor, reconstructions: tf.Tensor): number {
  return tf.tidy(() => {
    const mse = tf.mean(tf.squaredDifference(images, reconstructions));
    return 100 * Math.sqrt(mse.dataSync()[0]);
  });
}
