/** Uniform draw in [0, 1). */
export type Rng = () => number;

/**
 * mulberry32: small seeded generator, plenty for data-order and
 * augmentation draws.  Math.random is not seedable, and pulling in a
 * heavyweight RNG package for a 10-line generator is not worth it.
 */
export function mulberry32(seed: number): Rng {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Independent stream derived from a job seed.  Each consumer (sampler,
 * augmentation) gets its own stream index so adding draws to one cannot
 * shift the other.
 */
export function derive(seed: number, stream: number): Rng {
  return mulberry32(((seed >>> 0) ^ Math.imul(stream + 1, 0x9e3779b9)) >>> 0);
}

/** Uniform integer in [lo, hi], both ends included. */
export function randInt(rng: Rng, lo: number, hi: number): number {
  return lo + Math.floor(rng() * (hi - lo + 1));
}

/** In-place Fisher-Yates shuffle. */
export function shuffle(values: Int32Array, rng: Rng): Int32Array {
  for (let i = values.length - 1; i > 0; i--) {
    const j = Math.floor(rng() * (i + 1));
    const tmp = values[i];
    values[i] = values[j];
    values[j] = tmp;
  }
  return values;
}
