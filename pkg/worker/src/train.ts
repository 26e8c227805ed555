import * as tf from '@tensorflow/tfjs';

import { CROP, augmentImage, centerCrop, normalize } from './augment.js';
import { LABELS, Label, Split } from './data.js';
import { WorkerError } from './model.js';
import { derive } from './rng.js';
import { balancedBatches } from './sampler.js';

/** Training recipe as it arrives over the wire; field names are fixed. */
export interface WireConfig {
  mini_batches: number;
  batch_size: number;
  lr: number;
  beta1: number;
  beta2: number;
  label: Label;
  eval_interval: number;
  seed: number;
}

export function checkConfig(cfg: unknown): WireConfig {
  const c = cfg as Record<string, unknown>;
  if (typeof cfg !== 'object' || cfg === null) {
    throw new WorkerError('config must be an object', false);
  }
  for (const field of ['mini_batches', 'batch_size', 'eval_interval'] as const) {
    if (!Number.isInteger(c[field]) || (c[field] as number) < 1) {
      throw new WorkerError(`config.${field} must be a positive integer`, false);
    }
  }
  for (const field of ['lr', 'beta1', 'beta2'] as const) {
    if (typeof c[field] !== 'number' || !(c[field] > 0)) {
      throw new WorkerError(`config.${field} must be a positive number`, false);
    }
  }
  if (!LABELS.includes(c.label as Label)) {
    throw new WorkerError(`config.label must be one of ${LABELS.join(', ')}`, false);
  }
  if (!Number.isInteger(c.seed) || (c.seed as number) < 0) {
    throw new WorkerError('config.seed must be a non-negative integer', false);
  }
  return cfg as WireConfig;
}

export interface TrainOptions {
  /** Called with the number of completed mini-batches. */
  onProgress?: (done: number) => void;
  /** Batches between progress callbacks; defaults to ~10 per job. */
  progressEvery?: number;
  /** Called after every batch with the on-batch training accuracy. */
  onBatch?: (step: number, loss: number, accuracy: number) => void;
  /** Test hook: return true after an evaluation to stop the job early. */
  stopEarly?: (step: number) => boolean;
}

export interface TrainOutcome {
  /** Validation accuracy at threshold 0.5, one point per eval interval. */
  series: number[];
  /** Training accuracy of every mini-batch. */
  batchAccuracy: number[];
}

/** Centre-cropped, normalized inputs of a whole split as one tensor. */
export function evalInputs(split: Split): tf.Tensor4D {
  const buf = new Float32Array(split.count * CROP * CROP);
  const size = split.height * split.width;
  for (let i = 0; i < split.count; i++) {
    const img = normalize(centerCrop(split.images.subarray(i * size, (i + 1) * size),
                                     split.height, split.width));
    buf.set(img, i * CROP * CROP);
  }
  return tf.tensor4d(buf, [split.count, CROP, CROP, 1]);
}

async function accuracyAt(model: tf.LayersModel, inputs: tf.Tensor4D, labels: Uint8Array): Promise<number> {
  const pred = model.predict(inputs, { batchSize: 64 }) as tf.Tensor;
  const scores = await pred.data();
  pred.dispose();
  let correct = 0;
  for (let i = 0; i < labels.length; i++) {
    if ((scores[i] > 0.5 ? 1 : 0) === labels[i]) correct++;
  }
  return correct / labels.length;
}

/**
 * Run the training recipe and collect the validation-accuracy series.
 *
 * Mini-batches come from the balanced sampler over the training split's
 * labels for the configured target; every image gets a fresh augmented
 * view and per-image normalization.  The optimizer is ADAM at the wire
 * learning rate with binary cross-entropy loss.  Validation accuracy
 * (full validation split, threshold 0.5) is recorded every
 * eval_interval batches.  Sampler and augmentation draws come from
 * streams derived from config.seed, so a repeated run consumes
 * identical index and view sequences.
 */
export async function train(
  model: tf.LayersModel,
  bundle: { train: Split; val: Split },
  cfg: WireConfig,
  opts: TrainOptions = {},
): Promise<TrainOutcome> {
  checkConfig(cfg);
  const samplerRng = derive(cfg.seed, 0);
  const augmentRng = derive(cfg.seed, 1);
  const labels = bundle.train.labels[cfg.label];
  const batches = balancedBatches(labels, cfg.batch_size, samplerRng);
  const progressEvery = opts.progressEvery ?? Math.max(1, Math.floor(cfg.mini_batches / 10));

  model.compile({
    optimizer: tf.train.adam(cfg.lr, cfg.beta1, cfg.beta2),
    loss: 'binaryCrossentropy',
    metrics: ['accuracy'],
  });

  const valX = evalInputs(bundle.val);
  const valY = bundle.val.labels[cfg.label];
  const imageSize = bundle.train.height * bundle.train.width;
  const series: number[] = [];
  const batchAccuracy: number[] = [];

  try {
    const xBuf = new Float32Array(cfg.batch_size * CROP * CROP);
    const yBuf = new Float32Array(cfg.batch_size);
    for (let step = 1; step <= cfg.mini_batches; step++) {
      const batch = batches.next().value as Int32Array;
      for (let slot = 0; slot < cfg.batch_size; slot++) {
        const idx = batch[slot];
        const img = bundle.train.images.subarray(idx * imageSize, (idx + 1) * imageSize);
        const view = normalize(augmentImage(img, bundle.train.height, bundle.train.width, augmentRng));
        xBuf.set(view, slot * CROP * CROP);
        yBuf[slot] = labels[idx];
      }
      const x = tf.tensor4d(xBuf, [cfg.batch_size, CROP, CROP, 1]);
      const y = tf.tensor2d(yBuf, [cfg.batch_size, 1]);
      const [loss, accuracy] = (await model.trainOnBatch(x, y)) as number[];
      x.dispose();
      y.dispose();
      if (!Number.isFinite(loss)) {
        throw new WorkerError(`non-finite training loss at mini-batch ${step}`, false);
      }
      batchAccuracy.push(accuracy);
      opts.onBatch?.(step, loss, accuracy);
      if (step % cfg.eval_interval === 0) {
        series.push(await accuracyAt(model, valX, valY));
      }
      if (step % progressEvery === 0) {
        opts.onProgress?.(step);
      }
      if (opts.stopEarly?.(step)) break;
    }
  } finally {
    valX.dispose();
  }
  return { series, batchAccuracy };
}

/** Sigmoid scores of a whole split, for threshold tuning downstream. */
export async function scoreSplit(model: tf.LayersModel, split: Split, label: Label): Promise<{ scores: number[]; labels: number[] }> {
  const inputs = evalInputs(split);
  const pred = model.predict(inputs, { batchSize: 64 }) as tf.Tensor;
  const scores = Array.from(await pred.data());
  pred.dispose();
  inputs.dispose();
  return { scores, labels: Array.from(split.labels[label]) };
}
