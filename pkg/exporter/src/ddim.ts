/**
 * The ddim binary feature format.
 *
 * Layout: magic "DDIM", version u16 = 1, n u32, d u32 (little endian),
 * then n*d little-endian float32 values row-major.  Labels live in an
 * optional sibling file at `<path>.labels` holding n little-endian u32
 * class ids.
 */

import * as fs from 'fs';

export const MAGIC = 'DDIM';
export const VERSION = 1;
const HEADER_BYTES = 14;

export interface FeatureMatrix {
  n: number;
  d: number;
  /** row-major, length n*d */
  data: Float32Array;
}

export function labelsPath(path: string): string {
  return path + '.labels';
}

export function encodeFeatures(matrix: FeatureMatrix): Buffer {
  if (matrix.n < 1 || matrix.d < 1) throw new Error('empty dataset');
  if (matrix.data.length !== matrix.n * matrix.d) {
    throw new Error(`data length ${matrix.data.length} != n*d = ${matrix.n * matrix.d}`);
  }
  const buf = Buffer.alloc(HEADER_BYTES + 4 * matrix.n * matrix.d);
  buf.write(MAGIC, 0, 'ascii');
  buf.writeUInt16LE(VERSION, 4);
  buf.writeUInt32LE(matrix.n, 6);
  buf.writeUInt32LE(matrix.d, 10);
  for (let i = 0; i < matrix.data.length; i++) {
    const v = matrix.data[i];
    if (!Number.isFinite(v)) {
      throw new Error(`non-finite value at row ${Math.floor(i / matrix.d)}, column ${i % matrix.d}`);
    }
    buf.writeFloatLE(v, HEADER_BYTES + 4 * i);
  }
  return buf;
}

export function writeFeatures(matrix: FeatureMatrix, path: string): void {
  fs.writeFileSync(path, encodeFeatures(matrix));
}

export function readFeatures(path: string): FeatureMatrix {
  const buf = fs.readFileSync(path);
  if (buf.length < HEADER_BYTES) throw new Error(`${path}: truncated header`);
  if (buf.toString('ascii', 0, 4) !== MAGIC) throw new Error(`${path}: bad magic`);
  const version = buf.readUInt16LE(4);
  if (version !== VERSION) throw new Error(`${path}: unsupported version ${version}`);
  const n = buf.readUInt32LE(6);
  const d = buf.readUInt32LE(10);
  if (n === 0 || d === 0) throw new Error(`${path}: empty dataset (n=${n}, d=${d})`);
  if (buf.length !== HEADER_BYTES + 4 * n * d) {
    throw new Error(`${path}: payload holds ${buf.length - HEADER_BYTES} bytes, header implies ${4 * n * d}`);
  }
  const data = new Float32Array(n * d);
  for (let i = 0; i < data.length; i++) {
    const v = buf.readFloatLE(HEADER_BYTES + 4 * i);
    if (!Number.isFinite(v)) {
      throw new Error(`${path}: non-finite value at row ${Math.floor(i / d)}, column ${i % d}`);
    }
    data[i] = v;
  }
  return { n, d, data };
}

export function writeLabels(labels: ArrayLike<number>, featurePath: string): void {
  const buf = Buffer.alloc(4 * labels.length);
  for (let i = 0; i < labels.length; i++) buf.writeUInt32LE(labels[i] >>> 0, 4 * i);
  fs.writeFileSync(labelsPath(featurePath), buf);
}

export function readLabels(featurePath: string, n: number): Uint32Array {
  const buf = fs.readFileSync(labelsPath(featurePath));
  if (buf.length !== 4 * n) {
    throw new Error(`${labelsPath(featurePath)}: holds ${buf.length / 4} labels, expected ${n}`);
  }
  const out = new Uint32Array(n);
  for (let i = 0; i < n; i++) out[i] = buf.readUInt32LE(4 * i);
  return out;
}
