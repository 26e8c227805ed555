import * as tf from '@tensorflow/tfjs';

/** Protocol-level failure; transient ones are retried by the engine. */
export class WorkerError extends Error {
  constructor(message: string, public readonly transient: boolean = false) {
    super(message);
    this.name = 'WorkerError';
  }
}

export interface ConvLayer {
  kind: 'conv';
  filters: number;
  size: number;
  stride: number;
}

export interface PoolLayer {
  kind: 'max_pool' | 'avg_pool';
  stride: number;
}

export interface DenseLayer {
  kind: 'dense' | 'output';
  units: number;
  act: string;
}

export type WireLayer = ConvLayer | PoolLayer | DenseLayer;

export interface WireArch {
  input: [number, number, number];
  layers: WireLayer[];
}

function bad(msg: string): never {
  throw new WorkerError(`unrealizable architecture: ${msg}`, false);
}

export function checkArch(arch: unknown): WireArch {
  if (typeof arch !== 'object' || arch === null) bad('not an object');
  const a = arch as Record<string, unknown>;
  const input = a.input;
  if (!Array.isArray(input) || input.length !== 3 || input.some(d => !Number.isInteger(d) || d < 1)) {
    bad(`input shape must be three positive integers, got ${JSON.stringify(input)}`);
  }
  if (!Array.isArray(a.layers) || a.layers.length === 0) bad('empty layer list');
  for (const layer of a.layers as Record<string, unknown>[]) {
    switch (layer.kind) {
      case 'conv':
        if (![layer.filters, layer.size, layer.stride].every(v => Number.isInteger(v) && (v as number) >= 1)) {
          bad(`conv fields must be positive integers (${JSON.stringify(layer)})`);
        }
        break;
      case 'max_pool':
      case 'avg_pool':
        if (!Number.isInteger(layer.stride) || (layer.stride as number) < 1) {
          bad(`pool stride must be a positive integer (${JSON.stringify(layer)})`);
        }
        break;
      case 'dense':
      case 'output':
        if (!Number.isInteger(layer.units) || (layer.units as number) < 1) {
          bad(`dense units must be a positive integer (${JSON.stringify(layer)})`);
        }
        break;
      default:
        bad(`unknown layer kind ${JSON.stringify(layer.kind)}`);
    }
  }
  return arch as WireArch;
}

const ACTIVATIONS = new Set(['selu', 'sigmoid', 'relu', 'tanh', 'linear']);

/** floor((n - window) / stride) + 1, the valid-padding shape rule. */
function slide(n: number, window: number, stride: number): number {
  return Math.floor((n - window) / stride) + 1;
}

/** Reject layers whose valid-padding output would lose a dimension. */
function checkShapes(arch: WireArch): void {
  let [h, w] = arch.input;
  for (const layer of arch.layers) {
    if (layer.kind === 'conv') {
      h = slide(h, layer.size, layer.stride);
      w = slide(w, layer.size, layer.stride);
    } else if (layer.kind === 'max_pool' || layer.kind === 'avg_pool') {
      h = slide(h, layer.stride, layer.stride);
      w = slide(w, layer.stride, layer.stride);
    } else {
      return;
    }
    if (h < 1 || w < 1) {
      bad(`${layer.kind} leaves a ${h}x${w} feature map`);
    }
  }
}

/**
 * Realize a wire-format architecture layer for layer.
 *
 * Convolutions use valid padding and pool windows equal their stride,
 * matching the shape rules the search engine pruned against.  Weights
 * start LeCun-normal with zero biases; a seed makes the initial weights
 * reproducible (each layer derives its own).  Any shape inconsistency
 * surfaces as a non-transient WorkerError.
 */
export function buildModel(archInput: unknown, seed?: number): tf.Sequential {
  const arch = checkArch(archInput);
  checkShapes(arch);
  const [h, w, c] = arch.input;
  const model = tf.sequential();
  const init = (k: number) =>
    tf.initializers.leCunNormal(seed === undefined ? {} : { seed: seed + k });

  try {
    model.add(tf.layers.inputLayer({ inputShape: [h, w, c] }));
    let flattened = false;
    arch.layers.forEach((layer, k) => {
      switch (layer.kind) {
        case 'conv':
          model.add(tf.layers.conv2d({
            filters: layer.filters,
            kernelSize: layer.size,
            strides: layer.stride,
            padding: 'valid',
            activation: 'selu',
            kernelInitializer: init(k),
            biasInitializer: 'zeros',
          }));
          break;
        case 'max_pool':
        case 'avg_pool': {
          const pool = { poolSize: layer.stride, strides: layer.stride, padding: 'valid' as const };
          model.add(layer.kind === 'max_pool'
            ? tf.layers.maxPooling2d(pool)
            : tf.layers.averagePooling2d(pool));
          break;
        }
        default: {
          const act = layer.act ?? 'linear';
          if (!ACTIVATIONS.has(act)) bad(`unknown activation ${JSON.stringify(act)}`);
          if (!flattened) {
            model.add(tf.layers.flatten());
            flattened = true;
          }
          model.add(tf.layers.dense({
            units: layer.units,
            activation: act === 'linear' ? undefined : (act as 'selu' | 'sigmoid' | 'relu' | 'tanh'),
            kernelInitializer: init(k),
            biasInitializer: 'zeros',
          }));
        }
      }
    });
  } catch (err) {
    model.dispose();
    if (err instanceof WorkerError) throw err;
    bad(err instanceof Error ? err.message : String(err));
  }
  return model;
}
