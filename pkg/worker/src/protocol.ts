import { Bundle } from './data.js';
import { WorkerError, buildModel } from './model.js';
import { WireConfig, checkConfig, scoreSplit, train } from './train.js';
import { CROP } from './augment.js';

/**
 * Wire protocol, engine side up: one JSON record per line.  Requests
 * are train_request / finalize_request; replies are progress, result,
 * finalize_result and error, all echoing the request id.
 */

export interface ScoredSplit {
  scores: number[];
  labels: number[];
}

export interface JobRunner {
  train(arch: unknown, config: unknown, onProgress: (done: number) => void): Promise<number[]>;
  finalize(arch: unknown, config: unknown, onProgress: (done: number) => void): Promise<{ val: ScoredSplit; test: ScoredSplit }>;
}

/** Map a thrown value onto the wire error fields. */
export function classifyError(err: unknown): { msg: string; transient: boolean } {
  if (err instanceof WorkerError) {
    return { msg: err.message, transient: err.transient };
  }
  const msg = err instanceof Error ? err.message : String(err);
  // Allocation failures are worth retrying once memory frees up;
  // anything else is a bug or a bad request.
  const transient = /out of memory|allocation failed|oom/i.test(msg);
  return { msg, transient };
}

export async function handleMessage(
  msg: unknown,
  runner: JobRunner,
  emit: (reply: Record<string, unknown>) => void,
): Promise<void> {
  const record = (typeof msg === 'object' && msg !== null ? msg : {}) as Record<string, unknown>;
  const id = typeof record.id === 'number' ? record.id : null;
  try {
    if (record.type === 'train_request') {
      const series = await runner.train(record.arch, record.config,
        done => emit({ type: 'progress', id, done }));
      emit({ type: 'result', id, series });
    } else if (record.type === 'finalize_request') {
      const { val, test } = await runner.finalize(record.arch, record.config,
        done => emit({ type: 'progress', id, done }));
      emit({ type: 'finalize_result', id, val, test });
    } else {
      emit({
        type: 'error', id, transient: false,
        msg: `unknown request type ${JSON.stringify(record.type)}`,
      });
    }
  } catch (err) {
    const { msg: message, transient } = classifyError(err);
    emit({ type: 'error', id, transient, msg: message });
  }
}

/** Job runner that trains for real against a loaded dataset bundle. */
export function makeRunner(bundle: Bundle): JobRunner {
  const runJob = async (archRaw: unknown, cfgRaw: unknown, onProgress: (done: number) => void) => {
    const cfg: WireConfig = checkConfig(cfgRaw);
    const model = buildModel(archRaw, cfg.seed);
    const shape = model.inputs[0].shape; // [null, h, w, c]
    if (shape[1] !== CROP || shape[2] !== CROP || shape[3] !== 1) {
      model.dispose();
      throw new WorkerError(
        `data pipeline yields ${CROP}x${CROP}x1 inputs, architecture wants ` +
        `${shape[1]}x${shape[2]}x${shape[3]}`, false);
    }
    try {
      const outcome = await train(model, bundle, cfg, { onProgress });
      return { model, series: outcome.series };
    } catch (err) {
      model.dispose();
      throw err;
    }
  };

  return {
    async train(archRaw, cfgRaw, onProgress) {
      const { model, series } = await runJob(archRaw, cfgRaw, onProgress);
      model.dispose();
      return series;
    },
    async finalize(archRaw, cfgRaw, onProgress) {
      const { model } = await runJob(archRaw, cfgRaw, onProgress);
      try {
        const cfg = cfgRaw as WireConfig;
        const val = await scoreSplit(model, bundle.val, cfg.label);
        const test = await scoreSplit(model, bundle.test, cfg.label);
        return { val, test };
      } finally {
        model.dispose();
      }
    },
  };
}
