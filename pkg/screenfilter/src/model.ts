import * as tf from '@tensorflow/tfjs';

export const INPUT_SIZE = 128;
export const DROPOUT_RATE = 0.5;

/**
 * Screenshot-vs-image classifier.
 *
 * Two convolutions, each followed by a max-pooling layer, feed a single
 * 512-unit dense layer and a 2-unit softmax head. Dropout (rate 0.5)
 * guards both fully-connected layers; it is active in training only, so
 * inference is deterministic.
 *
 * Kernel sizes, channel counts, and the optimizer are this package's
 * defaults (see README), chosen small enough for CPU training.
 */
export function buildScreenNet(inputSize: number = INPUT_SIZE): tf.Sequential {
  const model = tf.sequential();
  model.add(
    tf.layers.conv2d({
      inputShape: [inputSize, inputSize, 3],
      filters: 8,
      kernelSize: 5,
      strides: 2,
      activation: 'relu',
    }),
  );
  model.add(tf.layers.maxPooling2d({ poolSize: 2 }));
  model.add(tf.layers.conv2d({ filters: 16, kernelSize: 3, activation: 'relu' }));
  model.add(tf.layers.maxPooling2d({ poolSize: 2 }));
  model.add(tf.layers.flatten());
  model.add(tf.layers.dropout({ rate: DROPOUT_RATE }));
  model.add(tf.layers.dense({ units: 512, activation: 'relu' }));
  model.add(tf.layers.dropout({ rate: DROPOUT_RATE }));
  model.add(tf.layers.dense({ units: 2, activation: 'softmax' }));
  model.compile({
    optimizer: tf.train.adam(1e-3),
    loss: 'categoricalCrossentropy',
    metrics: ['accuracy'],
  });
  return model;
}
