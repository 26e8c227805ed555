import { Rng, shuffle } from './rng.js';

/**
 * Endless index batches drawn half-and-half from each class.
 *
 * Mirrors the engine's sampler: each class keeps its own shuffled pool,
 * a fair coin picks the class of every slot, and a pool reshuffles when
 * it cycles, so every index keeps appearing no matter how skewed the
 * labels are.  A one-class label vector degrades to plain sampling.
 */
export function* balancedBatches(
  labels: Uint8Array,
  batchSize: number,
  rng: Rng,
): Generator<Int32Array> {
  if (labels.length === 0) {
    throw new Error('labels must be non-empty');
  }
  if (batchSize < 1) {
    throw new Error('batchSize must be >= 1');
  }
  const pools: Int32Array[] = [0, 1].map(cls => {
    const idx: number[] = [];
    for (let i = 0; i < labels.length; i++) {
      if (labels[i] === cls) idx.push(i);
    }
    return Int32Array.from(idx);
  });
  if (pools[0].length === 0 && pools[1].length === 0) {
    throw new Error('labels must contain at least one 0 or 1 entry');
  }

  const order = pools.map(pool => shuffle(pool.slice(), rng));
  const cursor = [0, 0];

  const draw = (cls: number): number => {
    if (cursor[cls] >= order[cls].length) {
      order[cls] = shuffle(pools[cls].slice(), rng);
      cursor[cls] = 0;
    }
    return order[cls][cursor[cls]++];
  };

  while (true) {
    const batch = new Int32Array(batchSize);
    for (let slot = 0; slot < batchSize; slot++) {
      let cls = rng() < 0.5 ? 1 : 0;
      if (pools[cls].length === 0) cls = 1 - cls;
      batch[slot] = draw(cls);
    }
    yield batch;
  }
}
