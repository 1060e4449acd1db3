/**
 * Pipeline commands: train the networks on a CIFAR-10 binary directory,
 * export fold latents in the wire formats, noise images, render sheets.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { foldIndices, gather, loadCifarBinary, readSplitManifest } from "./cifar.js";
import { encodeImages, exportFold, predictLabels } from "./export.js";
import { saltAndPepper } from "./noise.js";
import { renderGrid } from "./render.js";
import { loadModel, saveModels, trainPipeline, writeRunManifest } from "./train.js";
import { readFeatures, readLabels, writeFeatures, writeLabels } from "./wire.js";

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .command(
      "train",
      "train the autoencoder, then the classifier, and save both",
      (y) => y
        .option("data", { type: "string", demandOption: true, describe: "CIFAR-10 binary directory" })
        .option("split", { type: "string", demandOption: true, describe: "split manifest from the memory package" })
        .option("fold", { type: "number", default: 0 })
        .option("latent", { type: "number", default: 512 })
        .option("epochs", { type: "number", default: 20 })
        .option("batch-size", { type: "number", default: 128 })
        .option("out", { type: "string", demandOption: true, describe: "model output directory" }),
      async (argv) => {
        const corpus = loadCifarBinary(argv.data);
        const manifest = readSplitManifest(argv.split);
        if (manifest.count !== corpus.count) {
          throw new Error(
            `split manifest covers ${manifest.count} items, corpus has ${corpus.count}`,
          );
        }
        const fold = foldIndices(manifest, argv.fold);
        const options = {
          latentSize: argv.latent,
          epochs: argv.epochs,
          batchSize: argv.batchSize,
        };
        const pipeline = await trainPipeline(
          gather(corpus, fold.trainingFit),
          gather(corpus, fold.trainingVal),
          options,
        );
        await saveModels(argv.out, pipeline);
        writeRunManifest(argv.out, options, pipeline);
        console.log(
          `scaled RMSE ${pipeline.autoencoderScaledRmse.toFixed(2)}, ` +
          `classifier accuracy ${(100 * pipeline.classifierAccuracy).toFixed(2)}% -> ${argv.out}`,
        );
      },
    )
    .command(
      "export",
      "encode a fold subset into .eamf/.eaml files",
      (y) => y
        .option("data", { type: "string", demandOption: true })
        .option("split", { type: "string", demandOption: true })
        .option("fold", { type: "number", default: 0 })
        .option("which", {
          type: "string", default: "remembered",
          choices: ["training", "remembered", "test"] as const,
        })
        .option("models", { type: "string", describe: "required unless --raw" })
        .option("raw", {
          type: "boolean", default: false,
          describe: "write raw 3072-wide image rows instead of latents",
        })
        .option("features-out", { type: "string", demandOption: true })
        .option("labels-out", { type: "string", demandOption: true }),
      async (argv) => {
        const corpus = loadCifarBinary(argv.data);
        const manifest = readSplitManifest(argv.split);
        const fold = foldIndices(manifest, argv.fold);
        const which = argv.which as "training" | "remembered" | "test";
        let result: { count: number; n: number };
        if (argv.raw) {
          const subset = gather(corpus, fold[which]);
          writeFeatures(
            { data: subset.images, count: subset.count, n: 3072 },
            argv.featuresOut,
          );
          writeLabels(subset.labels, argv.labelsOut);
          result = { count: subset.count, n: 3072 };
        } else {
          if (!argv.models) {
            throw new Error("--models is required unless --raw is set");
          }
          const encoder = await loadModel(path.join(argv.models, "encoder"));
          result = exportFold(encoder, corpus, fold, which, {
            features: argv.featuresOut,
            labels: argv.labelsOut,
          });
        }
        console.log(
          `exported ${result.count} rows of width ${result.n} -> ${argv.featuresOut}`,
        );
      },
    )
    .command(
      "encode",
      "encode raw image rows (width 3072) into latent features",
      (y) => y
        .option("features", { type: "string", demandOption: true })
        .option("models", { type: "string", demandOption: true })
        .option("out", { type: "string", demandOption: true }),
      async (argv) => {
        const raw = readFeatures(argv.features);
        if (raw.n !== 3072) {
          throw new Error(`expected raw image rows of width 3072, got ${raw.n}`);
        }
        const encoder = await loadModel(path.join(argv.models, "encoder"));
        const set = {
          images: raw.data,
          labels: new Uint16Array(raw.count),
          count: raw.count,
        };
        const latents = encodeImages(encoder, set);
        const latentSize = latents.length / raw.count;
        writeFeatures(
          { data: latents, count: raw.count, n: latentSize },
          argv.out,
        );
        console.log(
          `encoded ${raw.count} images to width ${latentSize} -> ${argv.out}`,
        );
      },
    )
    .command(
      "predict",
      "classify latent feature rows, writing a predicted-label file",
      (y) => y
        .option("features", { type: "string", demandOption: true })
        .option("models", { type: "string", demandOption: true })
        .option("flags", { type: "string", describe: "acceptance flags; 0xFFFF rows stay rejected" })
        .option("out", { type: "string", demandOption: true }),
      async (argv) => {
        const features = readFeatures(argv.features);
        const classifier = await loadModel(path.join(argv.models, "classifier"));
        const rejected = argv.flags
          ? Array.from(readLabels(argv.flags)).map((f) => f === 0xffff)
          : undefined;
        const labels = predictLabels(classifier, features.data, features.n, rejected);
        writeLabels(labels, argv.out);
        console.log(`predicted ${labels.length} labels -> ${argv.out}`);
      },
    )
    .command(
      "noise",
      "salt-and-pepper noise over raw image rows (width 3072)",
      (y) => y
        .option("features", { type: "string", demandOption: true })
        .option("out", { type: "string", demandOption: true })
        .option("fraction", { type: "number", default: 0.5 })
        .option("seed", { type: "number", default: 42 }),
      async (argv) => {
        const features = readFeatures(argv.features);
        const noisy = saltAndPepper(features.data, argv.fraction, argv.seed);
        writeFeatures({ ...features, data: noisy }, argv.out);
        console.log(`noised ${features.count} images -> ${argv.out}`);
      },
    )
    .command(
      "render",
      "render feature rows into a PNG grid sheet",
      (y) => y
        .option("features", { type: "string", demandOption: true })
        .option("models", { type: "string", describe: "needed unless rows are raw 3072-wide images" })
        .option("flags", { type: "string", describe: ".eaml; 0xFFFF rows render black" })
        .option("columns", { type: "number", default: 10 })
        .option("out", { type: "string", demandOption: true }),
      async (argv) => {
        const features = readFeatures(argv.features);
        const decoder = argv.models
          ? await loadModel(path.join(argv.models, "decoder"))
          : undefined;
        const flags = argv.flags ? readLabels(argv.flags) : undefined;
        const png = renderGrid(features, {
          columns: argv.columns, decoder, flags,
        });
        fs.writeFileSync(argv.out, png);
        console.log(`rendered ${features.count} cells -> ${argv.out}`);
      },
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      console.error(`error: ${msg ?? err?.message}`);
      process.exit(1);
    })
    .parseAsync();
}

main();
