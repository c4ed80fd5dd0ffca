import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';

import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { labelOf, listDataset, splitDataset } from '../src/data';
import { readPng, resizeBilinear, writePng } from '../src/png';
import { makeToySet } from './toyset';

let root: string;

beforeAll(() => {
  root = fs.mkdtempSync(path.join(os.tmpdir(), 'screenfilter-data-'));
  makeToySet(path.join(root, 'toy'), 10, 48);
});

afterAll(() => {
  fs.rmSync(root, { recursive: true, force: true });
});

describe('dataset listing', () => {
  it('finds sorted classes and labeled files', () => {
    const ds = listDataset(path.join(root, 'toy'));
    expect(ds.classes).toEqual(['random', 'screenshot']);
    expect(ds.files).toHaveLength(20);
    expect(labelOf('screenshot/shot_00.png', ds.classes)).toBe(1);
  });

  it('rejects a single-class dataset', () => {
    const solo = path.join(root, 'solo');
    fs.mkdirSync(path.join(solo, 'only'), { recursive: true });
    fs.copyFileSync(path.join(root, 'toy/random/img_00.png'), path.join(solo, 'only/a.png'));
    expect(() => listDataset(solo)).toThrow(/2 class folders/);
  });

  it('rejects an empty class folder', () => {
    const bad = path.join(root, 'bad');
    fs.mkdirSync(path.join(bad, 'a'), { recursive: true });
    fs.mkdirSync(path.join(bad, 'b'), { recursive: true });
    fs.copyFileSync(path.join(root, 'toy/random/img_00.png'), path.join(bad, 'a/a.png'));
    expect(() => listDataset(bad)).toThrow(/no \.png images/);
  });
});

describe('seeded split', () => {
  it('is an 80/20 partition', () => {
    const ds = listDataset(path.join(root, 'toy'));
    const split = splitDataset(ds, 42);
    expect(split.train).toHaveLength(16);
    expect(split.val).toHaveLength(4);
    const all = new Set([...split.train, ...split.val]);
    expect(all.size).toBe(20);
  });

  it('is identical for the same seed and differs across seeds', () => {
    const ds = listDataset(path.join(root, 'toy'));
    expect(splitDataset(ds, 7)).toEqual(splitDataset(ds, 7));
    expect(splitDataset(ds, 7).train).not.toEqual(splitDataset(ds, 8).train);
  });
});

describe('png io', () => {
  it('roundtrips pixel data', () => {
    const img = { width: 5, height: 4, data: new Float32Array(5 * 4 * 3).map(() => 0.5) };
    const p = path.join(root, 'rt.png');
    writePng(p, img);
    const back = readPng(p);
    expect(back.width).toBe(5);
    expect(back.height).toBe(4);
    expect(Math.abs(back.data[0] - 0.5)).toBeLessThan(0.01);
  });

  it('resizes to the requested square', () => {
    const img = readPng(path.join(root, 'toy/screenshot/shot_00.png'));
    const out = resizeBilinear(img, 32);
    expect(out.width).toBe(32);
    expect(out.height).toBe(32);
    expect(out.data).toHaveLength(32 * 32 * 3);
  });
});
