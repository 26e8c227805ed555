import { Rng, randInt } from './rng.js';

export const CROP = 64;
export const MAX_SHIFT = 5;
// Intensity gain is e^beta with beta uniform in [-log 1.25, log 1.25].
const MAX_LOG_GAIN = Math.log(1.25);

/**
 * Mirror an out-of-range coordinate back into [0, n-1] without
 * repeating the edge pixel.  Rotation keeps samples inside a 128x128
 * source for every legal shift, so this only ever handles the +1
 * neighbour of a sample sitting exactly on the border.
 */
function reflect(i: number, n: number): number {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

function bilinear(src: Float32Array, h: number, w: number, x: number, y: number): number {
  const x0 = Math.floor(x);
  const y0 = Math.floor(y);
  const fx = x - x0;
  const fy = y - y0;
  const xa = reflect(x0, w);
  const xb = reflect(x0 + 1, w);
  const ya = reflect(y0, h);
  const yb = reflect(y0 + 1, h);
  return (
    src[ya * w + xa] * (1 - fx) * (1 - fy) +
    src[ya * w + xb] * fx * (1 - fy) +
    src[yb * w + xa] * (1 - fx) * fy +
    src[yb * w + xb] * fx * fy
  );
}

/**
 * One augmented training view of a grayscale image.
 *
 * The crop window's centre is shifted by whole pixels, the cropped area
 * is rotated around that centre, each axis is flipped with probability
 * one half, and the result is scaled by a random intensity gain.  Draw
 * order is fixed (shift x, shift y, angle, flip x, flip y, gain) so a
 * seeded stream reproduces the exact view sequence.
 */
export function augmentImage(src: Float32Array, srcH: number, srcW: number, rng: Rng): Float32Array {
  if (srcH < CROP + 2 * MAX_SHIFT || srcW < CROP + 2 * MAX_SHIFT) {
    throw new Error(`source ${srcH}x${srcW} too small for a shifted ${CROP}x${CROP} crop`);
  }
  const shiftX = randInt(rng, -MAX_SHIFT, MAX_SHIFT);
  const shiftY = randInt(rng, -MAX_SHIFT, MAX_SHIFT);
  const theta = rng() * 2 * Math.PI;
  const flipX = rng() < 0.5;
  const flipY = rng() < 0.5;
  const gain = Math.exp((rng() * 2 - 1) * MAX_LOG_GAIN);

  const cx = (srcW - 1) / 2 + shiftX;
  const cy = (srcH - 1) / 2 + shiftY;
  const half = (CROP - 1) / 2;
  const cos = Math.cos(theta);
  const sin = Math.sin(theta);

  const out = new Float32Array(CROP * CROP);
  for (let i = 0; i < CROP; i++) {
    const dy = flipY ? half - i : i - half;
    for (let j = 0; j < CROP; j++) {
      const dx = flipX ? half - j : j - half;
      const x = cx + cos * dx - sin * dy;
      const y = cy + sin * dx + cos * dy;
      out[i * CROP + j] = bilinear(src, srcH, srcW, x, y) * gain;
    }
  }
  return out;
}

/** Undistorted centre crop, used for validation and test images. */
export function centerCrop(src: Float32Array, srcH: number, srcW: number): Float32Array {
  if (srcH < CROP || srcW < CROP) {
    throw new Error(`source ${srcH}x${srcW} too small for a ${CROP}x${CROP} crop`);
  }
  const top = (srcH - CROP) >> 1;
  const left = (srcW - CROP) >> 1;
  const out = new Float32Array(CROP * CROP);
  for (let i = 0; i < CROP; i++) {
    out.set(src.subarray((top + i) * srcW + left, (top + i) * srcW + left + CROP), i * CROP);
  }
  return out;
}

/** Per-image normalization: subtract the image mean, divide by 255. */
export function normalize(img: Float32Array): Float32Array {
  let sum = 0;
  for (let i = 0; i < img.length; i++) sum += img[i];
  const mean = sum / img.length;
  const out = new Float32Array(img.length);
  for (let i = 0; i < img.length; i++) out[i] = (img[i] - mean) / 255;
  return out;
}
