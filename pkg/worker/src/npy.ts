import * as fs from 'node:fs';

/**
 * Minimal .npy (format version 1.0) reader/writer.
 *
 * Covers exactly what the dataset bundles need: C-ordered uint8,
 * float32 and float64 arrays.  The header is the Python dict literal
 * the format mandates; it is regex-parsed rather than eval'd.
 */

const MAGIC = Buffer.from('\x93NUMPY', 'latin1');

export type NpyData = Uint8Array | Float32Array | Float64Array;

export interface NpyArray {
  shape: number[];
  data: NpyData;
}

const DESCR_TO_CTOR: Record<string, new (b: ArrayBuffer) => NpyData> = {
  '|u1': Uint8Array,
  '<f4': Float32Array,
  '<f8': Float64Array,
};

function descrOf(data: NpyData): string {
  if (data instanceof Uint8Array) return '|u1';
  if (data instanceof Float32Array) return '<f4';
  return '<f8';
}

export function parseNpy(buf: Buffer): NpyArray {
  if (buf.length < 10 || !buf.subarray(0, 6).equals(MAGIC)) {
    throw new Error('not an npy file');
  }
  const major = buf[6];
  if (major !== 1) {
    throw new Error(`unsupported npy version ${major}.${buf[7]}`);
  }
  const headerLen = buf.readUInt16LE(8);
  const header = buf.toString('latin1', 10, 10 + headerLen);

  const descr = /'descr':\s*'([^']+)'/.exec(header)?.[1];
  const fortran = /'fortran_order':\s*(True|False)/.exec(header)?.[1];
  const shapeText = /'shape':\s*\(([^)]*)\)/.exec(header)?.[1];
  if (!descr || !fortran || shapeText === undefined) {
    throw new Error(`malformed npy header: ${header.trim()}`);
  }
  if (fortran === 'True') {
    throw new Error('fortran-ordered npy arrays are not supported');
  }
  const ctor = DESCR_TO_CTOR[descr];
  if (!ctor) {
    throw new Error(`unsupported npy dtype ${descr}`);
  }
  const shape = shapeText
    .split(',')
    .map(s => s.trim())
    .filter(s => s.length > 0)
    .map(Number);
  const count = shape.reduce((a, b) => a * b, 1);

  const start = 10 + headerLen;
  // Copy the payload out so the typed-array view starts aligned at 0.
  const copy = new Uint8Array(buf.length - start);
  copy.set(buf.subarray(start));
  const data = new ctor(copy.buffer);
  if (data.length !== count) {
    throw new Error(`npy payload holds ${data.length} elements, shape says ${count}`);
  }
  return { shape, data };
}

export function encodeNpy(shape: number[], data: NpyData): Buffer {
  const count = shape.reduce((a, b) => a * b, 1);
  if (count !== data.length) {
    throw new Error(`shape (${shape.join(', ')}) does not match ${data.length} elements`);
  }
  const shapeText = shape.length === 1 ? `(${shape[0]},)` : `(${shape.join(', ')})`;
  let header = `{'descr': '${descrOf(data)}', 'fortran_order': False, 'shape': ${shapeText}, }`;
  // Pad so the payload starts on a 64-byte boundary, newline-terminated.
  const unpadded = 10 + header.length + 1;
  header = header + ' '.repeat((64 - (unpadded % 64)) % 64) + '\n';

  const head = Buffer.alloc(10);
  MAGIC.copy(head, 0);
  head[6] = 1;
  head[7] = 0;
  head.writeUInt16LE(header.length, 8);
  const payload = Buffer.from(data.buffer, data.byteOffset, data.byteLength);
  return Buffer.concat([head, Buffer.from(header, 'latin1'), payload]);
}

export function readNpy(path: string): NpyArray {
  return parseNpy(fs.readFileSync(path));
}

export function writeNpy(path: string, shape: number[], data: NpyData): void {
  fs.writeFileSync(path, encodeNpy(shape, data));
}
