/**
 * Training drivers: the autoencoder first, then the classifier on the
 * frozen encoder's latents, with augmentation feeding the classifier.
 * Both report against the validation portion of the training split, and a
 * JSON run manifest records the hyperparameters of every run.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";

import { augmentBatch } from "./augment.js";
import { ImageSet, PIXELS } from "./cifar.js";
import { AutoencoderParts, buildAutoencoder, buildClassifier, scaledRmse } from "./models.js";
import { Rng } from "./rng.js";

export interface TrainOptions {
  latentSize: number;
  epochs?: number;
  batchSize?: number;
  baseFilters?: number;
  augment?: boolean;
  seed?: number;
}

export interface TrainedPipeline {
  parts: AutoencoderParts;
  classifier: tf.LayersModel;
  autoencoderScaledRmse: number;
  classifierAccuracy: number;
}

function toTensor(set: ImageSet): tf.Tensor4D {
  return tf.tensor4d(set.images, [set.count, 32, 32, 3]);
}

export async function trainAutoencoder(
  fit: ImageSet,
  val: ImageSet,
  options: TrainOptions,
): Promise<{ parts: AutoencoderParts; scaledRmse: number }> {
  const parts = buildAutoencoder(options.latentSize, {
    baseFilters: options.baseFilters,
  });
  const x = toTensor(fit);
  const xVal = toTensor(val);
  await parts.autoencoder.fit(x, x, {
    epochs: options.epochs ?? 20,
    batchSize: options.batchSize ?? 128,
    validationData: [xVal, xVal],
    verbose: 0,
  });
  const reconstructed = parts.autoencoder.predict(xVal) as tf.Tensor;
  const rmse = scaledRmse(xVal, reconstructed);
  tf.dispose([x, xVal, reconstructed]);
  return { parts, scaledRmse: rmse };
}

export async function trainClassifier(
  encoder: tf.LayersModel,
  fit: ImageSet,
  val: ImageSet,
  options: TrainOptions,
): Promise<{ classifier: tf.LayersModel; accuracy: number }> {
  const classifier = buildClassifier(options.latentSize, {
    baseFilters: options.baseFilters,
    weightDecay: 1e-4,
  });
  const rng = new Rng(options.seed ?? 42);
  const epochs = options.epochs ?? 20;
  const images = toTensor(fit);
  const labels = tf.tensor1d(Array.from(fit.labels), "float32");
  const valLatents = encoder.predict(toTensor(val)) as tf.Tensor;
  const valLabels = tf.tensor1d(Array.from(val.labels), "float32");

  for (let epoch = 0; epoch < epochs; epoch++) {
    const latents = tf.tidy(() => {
      const batch = options.augment === false
        ? images
        : augmentBatch(images, rng);
      return encoder.predict(batch) as tf.Tensor;
    });
    await classifier.fit(latents, labels, {
      epochs: 1,
      batchSize: options.batchSize ?? 128,
      verbose: 0,
    });
    latents.dispose();
  }

  const evaluation = classifier.evaluate(valLatents, valLabels, {
    batchSize: options.batchSize ?? 128,
  }) as tf.Scalar[];
  const accuracy = evaluation[1].dataSync()[0];
  tf.dispose([images, labels, valLatents, valLabels, ...evaluation]);
  return { classifier, accuracy };
}

export async function trainPipeline(
  fit: ImageSet,
  val: ImageSet,
  options: TrainOptions,
): Promise<TrainedPipeline> {
  const { parts, scaledRmse: rmse } = await trainAutoencoder(fit, val, options);
  const { classifier, accuracy } = await trainClassifier(
    parts.encoder, fit, val, options,
  );
  return {
    parts,
    classifier,
    autoencoderScaledRmse: rmse,
    classifierAccuracy: accuracy,
  };
}

export interface RunManifest {
  latentSize: number;
  epochs: number;
  batchSize: number;
  baseFilters: number;
  augment: boolean;
  seed: number;
  autoencoderScaledRmse: number | null;
  classifierAccuracy: number | null;
}

export function writeRunManifest(
  dir: string,
  options: TrainOptions,
  results: Partial<TrainedPipeline>,
): string {
  const manifest: RunManifest = {
    latentSize: options.latentSize,
    epochs: options.epochs ?? 20,
    batchSize: options.batchSize ?? 128,
    baseFilters: options.baseFilters ?? 32,
    augment: options.augment !== false,
    seed: options.seed ?? 42,
    autoencoderScaledRmse: results.autoencoderScaledRmse ?? null,
    classifierAccuracy: results.classifierAccuracy ?? null,
  };
  const file = path.join(dir, "run-manifest.json");
  fs.mkdirSync(dir, { recursive: true });
  fs.writeFileSync(file, JSON.stringify(manifest, null, 2) + "\n");
  return file;
}

// the pure-JS tfjs build has no file:// handlers, so stage the artifacts
// through plain files ourselves

export async function saveModel(model: tf.LayersModel, dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(tf.io.withSaveHandler(async (artifacts) => {
    const weightData = artifacts.weightData instanceof ArrayBuffer
      ? artifacts.weightData
      : tf.io.CompositeArrayBuffer.join(artifacts.weightData);
    fs.writeFileSync(
      path.join(dir, "model.json"),
      JSON.stringify({
        modelTopology: artifacts.modelTopology,
        weightSpecs: artifacts.weightSpecs,
      }),
    );
    fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.from(weightData));
    return {
      modelArtifactsInfo: {
        dateSaved: new Date(),
        modelTopologyType: "JSON" as const,
      },
    };
  }));
}

export async function loadModel(dir: string): Promise<tf.LayersModel> {
  const spec = JSON.parse(
    fs.readFileSync(path.join(dir, "model.json"), "utf-8"),
  );
  const raw = fs.readFileSync(path.join(dir, "weights.bin"));
  const weightData = raw.buffer.slice(
    raw.byteOffset, raw.byteOffset + raw.byteLength,
  );
  return tf.loadLayersModel(tf.io.fromMemory({
    modelTopology: spec.modelTopology,
    weightSpecs: spec.weightSpecs,
    weightData,
  }));
}

export async function saveModels(dir: string, pipeline: TrainedPipeline): Promise<void> {
  await saveModel(pipeline.parts.encoder, path.join(dir, "encoder"));
  await saveModel(pipeline.parts.decoder, path.join(dir, "decoder"));
  await saveModel(pipeline.classifier, path.join(dir, "classifier"));
}

/** Gather set rows helper so PIXELS stays the single width constant. */
export function imageTensor(images: Float32Array): tf.Tensor4D {
  return tf.tensor4d(images, [images.length / PIXELS, 32, 32, 3]);
}
