import * as fs from 'node:fs';
import * as path from 'node:path';

import * as tf from '@tensorflow/tfjs';

import { listDataset, loadTensors } from './data';
import { loadModel } from './io';
import { Evaluation, evaluateScores, rocCurve } from './metrics';

export interface EvaluateResult extends Evaluation {
  rocCsv: string;
}

/** Evaluate a saved model against a labeled class-folder set. */
export async function evaluateModel(modelDir: string, datasetDir: string): Promise<EvaluateResult> {
  const { model, meta } = await loadModel(modelDir);
  const ds = listDataset(datasetDir);
  const positiveIdx = meta.classes.indexOf(meta.positiveClass);
  const files = ds.files.map((f) => f.file);
  const { xs } = loadTensors(datasetDir, files, ds.classes, meta.inputSize);
  const probs = tf.tidy(() => (model.predict(xs) as tf.Tensor2D).dataSync());
  xs.dispose();

  const scores: number[] = [];
  const labels: number[] = [];
  files.forEach((file, i) => {
    scores.push(probs[i * meta.classes.length + positiveIdx]);
    labels.push(file.split('/')[0] === meta.positiveClass ? 1 : 0);
  });

  const summary = evaluateScores(scores, labels);
  const lines = ['threshold,fpr,tpr'];
  for (const p of rocCurve(scores, labels)) {
    lines.push(`${Number.isFinite(p.threshold) ? p.threshold.toFixed(6) : 'inf'},${p.fpr.toFixed(6)},${p.tpr.toFixed(6)}`);
  }
  return { ...summary, rocCsv: lines.join('\n') + '\n' };
}

export function writeRocCsv(result: EvaluateResult, outPath: string): void {
  fs.mkdirSync(path.dirname(outPath), { recursive: true });
  fs.writeFileSync(outPath, result.rocCsv);
}
