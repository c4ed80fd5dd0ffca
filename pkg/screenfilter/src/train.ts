import * as fs from 'node:fs';
import * as path from 'node:path';

import * as tf from '@tensorflow/tfjs';

import { listDataset, loadTensors, splitDataset } from './data';
import { saveModel } from './io';
import { INPUT_SIZE, buildScreenNet } from './model';

export interface TrainOptions {
  datasetDir: string;
  outDir: string;
  epochs: number;
  seed: number;
  inputSize?: number;
  positiveClass?: string;
  batchSize?: number;
  quiet?: boolean;
}

export interface TrainResult {
  classes: string[];
  trainAccuracy: number;
  valAccuracy: number | null;
}

/**
 * Train on a class-per-subfolder dataset with a seeded 80/20 split.
 *
 * Saves the model, its metadata, and the exact split manifest under
 * outDir. tf.js weight init draws from its own RNG, so the split is
 * reproducible from the seed while weights vary run to run.
 */
export async function train(opts: TrainOptions): Promise<TrainResult> {
  const size = opts.inputSize ?? INPUT_SIZE;
  const ds = listDataset(opts.datasetDir);
  const positive = opts.positiveClass ?? (ds.classes.includes('screenshot') ? 'screenshot' : ds.classes[0]);
  if (!ds.classes.includes(positive)) {
    throw new Error(`positive class '${positive}' is not a dataset folder`);
  }
  const split = splitDataset(ds, opts.seed);
  const { xs, ys } = loadTensors(opts.datasetDir, split.train, ds.classes, size);

  const model = buildScreenNet(size);
  const history = await model.fit(xs, ys, {
    epochs: opts.epochs,
    batchSize: opts.batchSize ?? 16,
    shuffle: true,
    verbose: 0,
    callbacks: opts.quiet
      ? []
      : [
          new tf.CustomCallback({
            onEpochEnd: async (epoch, logs) => {
              console.log(`epoch ${epoch + 1}/${opts.epochs} loss=${logs?.loss?.toFixed(4)} acc=${logs?.acc?.toFixed(4)}`);
            },
          }),
        ],
  });

  const accSeries = (history.history.acc ?? history.history.accuracy) as number[];
  const trainAccuracy = accSeries[accSeries.length - 1];

  let valAccuracy: number | null = null;
  if (split.val.length > 0) {
    const val = loadTensors(opts.datasetDir, split.val, ds.classes, size);
    const evalOut = model.evaluate(val.xs, val.ys) as tf.Scalar[];
    valAccuracy = (await evalOut[1].data())[0];
    val.xs.dispose();
    val.ys.dispose();
    evalOut.forEach((t) => t.dispose());
  }

  await saveModel(model, opts.outDir, { classes: ds.classes, positiveClass: positive, inputSize: size });
  fs.writeFileSync(path.join(opts.outDir, 'split.json'), JSON.stringify(split, null, 1));
  xs.dispose();
  ys.dispose();
  return { classes: ds.classes, trainAccuracy, valAccuracy };
}
