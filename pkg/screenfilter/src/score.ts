import * as fs from 'node:fs';
import * as path from 'node:path';

import * as tf from '@tensorflow/tfjs';

import { loadModel } from './io';
import { readPng, resizeBilinear } from './png';

export interface ScoreRecord {
  image: string;
  p_screenshot?: number;
  error?: string;
}

/**
 * Score images as screenshot probabilities.
 *
 * Keys default to the file stem so galleries named by hash hex produce
 * records the pipeline's filter can join directly; keyBy="path" keeps the
 * relative path instead. Unreadable images yield an error record and the
 * run continues.
 */
export async function scoreImages(
  modelDir: string,
  imagePaths: { key: string; path: string }[],
): Promise<ScoreRecord[]> {
  const { model, meta } = await loadModel(modelDir);
  const positiveIdx = meta.classes.indexOf(meta.positiveClass);
  const records: ScoreRecord[] = [];
  for (const { key, path: file } of imagePaths) {
    let img;
    try {
      img = resizeBilinear(readPng(file), meta.inputSize);
    } catch (e) {
      records.push({ image: key, error: (e as Error).message });
      continue;
    }
    const p = tf.tidy(() => {
      const x = tf.tensor4d(img.data, [1, meta.inputSize, meta.inputSize, 3]);
      const out = model.predict(x) as tf.Tensor2D;
      return out.dataSync()[positiveIdx];
    });
    records.push({ image: key, p_screenshot: p });
  }
  return records;
}

export function listImages(dir: string, keyBy: 'stem' | 'path'): { key: string; path: string }[] {
  const walk = (d: string): string[] =>
    fs
      .readdirSync(d, { withFileTypes: true })
      .flatMap((e) => (e.isDirectory() ? walk(path.join(d, e.name)) : [path.join(d, e.name)]))
      .filter((f) => f.toLowerCase().endsWith('.png'));
  return walk(dir)
    .sort()
    .map((p) => ({
      key: keyBy === 'stem' ? path.basename(p, path.extname(p)) : path.relative(dir, p),
      path: p,
    }));
}

export function toJsonl(records: ScoreRecord[]): string {
  return records.map((r) => JSON.stringify(r)).join('\n') + (records.length ? '\n' : '');
}
