import * as fs from 'node:fs';
import * as path from 'node:path';

import * as tf from '@tensorflow/tfjs';

import { readPng, resizeBilinear } from './png';

export interface LabeledFile {
  /** path relative to the dataset root, e.g. "screenshot/img_03.png" */
  file: string;
  label: number;
}

export interface Dataset {
  classes: string[];
  files: LabeledFile[];
}

export interface SplitManifest {
  seed: number;
  classes: string[];
  train: string[];
  val: string[];
}

/** Deterministic 32-bit PRNG (mulberry32); good enough for shuffling. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function seededShuffle<T>(items: T[], seed: number): T[] {
  const rand = mulberry32(seed);
  const out = items.slice();
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

/** List a class-per-subfolder image dataset; needs at least two non-empty classes. */
export function listDataset(root: string): Dataset {
  const classes = fs
    .readdirSync(root, { withFileTypes: true })
    .filter((e) => e.isDirectory())
    .map((e) => e.name)
    .sort();
  const files: LabeledFile[] = [];
  for (const [label, cls] of classes.entries()) {
    const entries = fs
      .readdirSync(path.join(root, cls))
      .filter((f) => f.toLowerCase().endsWith('.png'))
      .sort();
    if (entries.length === 0) {
      throw new Error(`class folder '${cls}' holds no .png images`);
    }
    for (const f of entries) {
      files.push({ file: `${cls}/${f}`, label });
    }
  }
  if (classes.length < 2) {
    throw new Error(`need at least 2 class folders, found ${classes.length}`);
  }
  return { classes, files };
}

/** Random 80/20 split, reproducible from the seed. */
export function splitDataset(ds: Dataset, seed: number, trainFraction = 0.8): SplitManifest {
  const shuffled = seededShuffle(ds.files, seed);
  const nTrain = Math.round(shuffled.length * trainFraction);
  return {
    seed,
    classes: ds.classes,
    train: shuffled.slice(0, nTrain).map((f) => f.file),
    val: shuffled.slice(nTrain).map((f) => f.file),
  };
}

export function labelOf(file: string, classes: string[]): number {
  const cls = file.split('/')[0];
  const label = classes.indexOf(cls);
  if (label < 0) throw new Error(`file ${file} is not under a known class folder`);
  return label;
}

/** Stack images into a [n, size, size, 3] tensor plus one-hot labels. */
export function loadTensors(
  root: string,
  files: string[],
  classes: string[],
  size: number,
): { xs: tf.Tensor4D; ys: tf.Tensor2D } {
  const pixels = new Float32Array(files.length * size * size * 3);
  const labels: number[] = [];
  files.forEach((file, i) => {
    const img = resizeBilinear(readPng(path.join(root, file)), size);
    pixels.set(img.data, i * size * size * 3);
    labels.push(labelOf(file, classes));
  });
  const xs = tf.tensor4d(pixels, [files.length, size, size, 3]);
  const ys = tf.oneHot(tf.tensor1d(labels, 'int32'), classes.length) as tf.Tensor2D;
  return { xs, ys };
}
