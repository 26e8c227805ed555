import * as fs from 'node:fs';
import * as path from 'node:path';

import { readNpy } from './npy.js';

export const LABELS = ['head', 'vacuole', 'acrosome'] as const;
export type Label = (typeof LABELS)[number];

export const IMAGE_SIZE = 128;

/** One dataset split: stacked grayscale images plus per-target labels. */
export interface Split {
  count: number;
  height: number;
  width: number;
  /** count * height * width values, row-major. */
  images: Float32Array;
  /** 0/1 per image, one vector per target label. */
  labels: Record<Label, Uint8Array>;
}

export interface Bundle {
  train: Split;
  val: Split;
  test: Split;
}

function parseLabelTable(text: string, file: string, count: number): Record<Label, Uint8Array> {
  const lines = text.split('\n').filter(l => l.trim().length > 0);
  if (lines.length === 0) {
    throw new Error(`${file}: empty label table`);
  }
  const columns = lines[0].split('\t').map(c => c.trim());
  for (const label of LABELS) {
    if (!columns.includes(label)) {
      throw new Error(`${file}: missing column '${label}' (header is '${lines[0]}')`);
    }
  }
  if (lines.length - 1 !== count) {
    throw new Error(`${file}: ${lines.length - 1} rows for ${count} images`);
  }
  const out = {
    head: new Uint8Array(count),
    vacuole: new Uint8Array(count),
    acrosome: new Uint8Array(count),
  };
  for (let row = 0; row < count; row++) {
    const cells = lines[row + 1].split('\t');
    for (const label of LABELS) {
      const value = Number(cells[columns.indexOf(label)]);
      if (value !== 0 && value !== 1) {
        throw new Error(`${file}: row ${row + 1}: label '${label}' must be 0 or 1`);
      }
      out[label][row] = value;
    }
  }
  return out;
}

export function loadSplit(dir: string, name: string): Split {
  const splitDir = path.join(dir, name);
  const { shape, data } = readNpy(path.join(splitDir, 'images.npy'));
  if (shape.length !== 3) {
    throw new Error(`${name}/images.npy: expected shape (count, height, width), got (${shape.join(', ')})`);
  }
  const [count, height, width] = shape;
  if (height !== IMAGE_SIZE || width !== IMAGE_SIZE) {
    throw new Error(`${name}/images.npy: images must be ${IMAGE_SIZE}x${IMAGE_SIZE}, got ${height}x${width}`);
  }
  const images = data instanceof Float32Array ? data : Float32Array.from(data);
  const labelFile = path.join(splitDir, 'labels.tsv');
  const labels = parseLabelTable(fs.readFileSync(labelFile, 'utf8'), labelFile, count);
  return { count, height, width, images, labels };
}

export function loadBundle(dir: string): Bundle {
  return {
    train: loadSplit(dir, 'train'),
    val: loadSplit(dir, 'val'),
    test: loadSplit(dir, 'test'),
  };
}
