import * as fs from 'node:fs';
import * as path from 'node:path';

import * as tf from '@tensorflow/tfjs';

export interface ModelMeta {
  classes: string[];
  positiveClass: string;
  inputSize: number;
}

/** Persist a layers model plus metadata into a directory (pure-JS backend has no file:// scheme). */
export async function saveModel(model: tf.LayersModel, dir: string, meta: ModelMeta): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const { weightData, ...rest } = artifacts;
      fs.writeFileSync(path.join(dir, 'model.json'), JSON.stringify(rest));
      const buffers = Array.isArray(weightData) ? weightData : [weightData];
      const total = buffers.reduce((n, b) => n + (b ? b.byteLength : 0), 0);
      const joined = Buffer.alloc(total);
      let off = 0;
      for (const b of buffers) {
        if (b) {
          joined.set(Buffer.from(b), off);
          off += b.byteLength;
        }
      }
      fs.writeFileSync(path.join(dir, 'weights.bin'), joined);
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' } };
    }),
  );
  fs.writeFileSync(path.join(dir, 'metadata.json'), JSON.stringify(meta, null, 1));
}

export async function loadModel(dir: string): Promise<{ model: tf.LayersModel; meta: ModelMeta }> {
  const artifacts = JSON.parse(fs.readFileSync(path.join(dir, 'model.json'), 'utf-8'));
  const weights = fs.readFileSync(path.join(dir, 'weights.bin'));
  const model = await tf.loadLayersModel(
    tf.io.fromMemory({
      ...artifacts,
      weightData: weights.buffer.slice(weights.byteOffset, weights.byteOffset + weights.byteLength),
    }),
  );
  const meta = JSON.parse(fs.readFileSync(path.join(dir, 'metadata.json'), 'utf-8')) as ModelMeta;
  return { model, meta };
}
