import * as fs from 'node:fs';

import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { evaluateModel, writeRocCsv } from './evaluate';
import { listImages, scoreImages, toJsonl } from './score';
import { train } from './train';

yargs(hideBin(process.argv))
  .command(
    'train',
    'train the screenshot classifier on a class-per-subfolder dataset',
    (y) =>
      y
        .option('dataset', { type: 'string', demandOption: true })
        .option('out', { type: 'string', demandOption: true })
        .option('epochs', { type: 'number', default: 20 })
        .option('seed', { type: 'number', default: 0 })
        .option('input-size', { type: 'number', default: 128 })
        .option('positive-class', { type: 'string' }),
    async (argv) => {
      const result = await train({
        datasetDir: argv.dataset,
        outDir: argv.out,
        epochs: argv.epochs,
        seed: argv.seed,
        inputSize: argv.inputSize,
        positiveClass: argv.positiveClass,
      });
      console.log(
        `train accuracy ${result.trainAccuracy.toFixed(4)}` +
          (result.valAccuracy !== null ? `, held-out accuracy ${result.valAccuracy.toFixed(4)}` : ''),
      );
    },
  )
  .command(
    'score',
    'write screenshot-probability JSONL for a directory of images',
    (y) =>
      y
        .option('model', { type: 'string', demandOption: true })
        .option('images', { type: 'string', demandOption: true })
        .option('out', { type: 'string', demandOption: true })
        .option('key-by', { choices: ['stem', 'path'] as const, default: 'stem' as const }),
    async (argv) => {
      const records = await scoreImages(argv.model, listImages(argv.images, argv.keyBy));
      fs.writeFileSync(argv.out, toJsonl(records));
      const failures = records.filter((r) => r.error).length;
      console.log(`scored ${records.length - failures} images (${failures} unreadable) -> ${argv.out}`);
    },
  )
  .command(
    'evaluate',
    'accuracy/precision/recall/F1/AUC against a labeled class-folder set',
    (y) =>
      y
        .option('model', { type: 'string', demandOption: true })
        .option('dataset', { type: 'string', demandOption: true })
        .option('roc-out', { type: 'string' }),
    async (argv) => {
      const result = await evaluateModel(argv.model, argv.dataset);
      const { rocCsv, ...summary } = result;
      console.log(JSON.stringify(summary, null, 1));
      if (argv.rocOut) {
        writeRocCsv(result, argv.rocOut);
        console.log(`ROC points -> ${argv.rocOut}`);
      }
    },
  )
  .demandCommand(1)
  .strict()
  .parse();
