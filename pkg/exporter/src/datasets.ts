/**
 * Dataset providers.
 *
 * Every provider yields raw images as float32 pixel arrays in [0, 255],
 * channels-last, plus integer labels where the source has them.  Real
 * datasets are read from local files only (this tool never downloads):
 *
 * - mnist / fashionmnist: IDX ubyte files (optionally .gz) under
 *   `<dataDir>/<name>/` named train-images-idx3-ubyte[.gz] and
 *   train-labels-idx1-ubyte[.gz].
 * - cifar10: binary batches data_batch_1.bin .. data_batch_5.bin.
 * - svhn / tinyimagenet / fashionproduct (or any folder name): PNG files,
 *   either flat or one subdirectory per class (subdirectory order defines
 *   class ids).  Files that fail to decode are logged and skipped.
 * - gaussian / saltpepper: generated noise, N(0, var 10) around mid-gray
 *   clipped to [0, 255], and 0/255 pixels with probability one half.
 */

import * as fs from 'fs';
import * as path from 'path';
import * as zlib from 'zlib';
import { PNG } from 'pngjs';

import { Stream } from './rng';

export interface RawDataset {
  name: string;
  height: number;
  width: number;
  channels: number;
  images: Float32Array[];
  labels?: number[];
}

export const GAUSSIAN_NOISE_VARIANCE = 10;
export const GAUSSIAN_NOISE_OFFSET = 128;

export function genGaussianNoise(
  n: number,
  height: number,
  width: number,
  seed: number | bigint,
): RawDataset {
  const count = n * height * width;
  const z = new Stream(seed).child('gaussian-noise').normals(count);
  const scale = Math.sqrt(GAUSSIAN_NOISE_VARIANCE);
  const images: Float32Array[] = [];
  for (let i = 0; i < n; i++) {
    const img = new Float32Array(height * width);
    for (let p = 0; p < img.length; p++) {
      const v = GAUSSIAN_NOISE_OFFSET + scale * z[i * img.length + p];
      img[p] = Math.fround(Math.min(255, Math.max(0, v)));
    }
    images.push(img);
  }
  return { name: 'gaussian', height, width, channels: 1, images };
}

export function genSaltPepper(
  n: number,
  height: number,
  width: number,
  seed: number | bigint,
): RawDataset {
  const count = n * height * width;
  const u = new Stream(seed).child('salt-pepper').uniforms(count);
  const images: Float32Array[] = [];
  for (let i = 0; i < n; i++) {
    const img = new Float32Array(height * width);
    for (let p = 0; p < img.length; p++) {
      img[p] = u[i * img.length + p] < 0.5 ? 255 : 0;
    }
    images.push(img);
  }
  return { name: 'saltpepper', height, width, channels: 1, images };
}

function maybeGunzip(filePath: string): Buffer {
  const buf = fs.readFileSync(filePath);
  return filePath.endsWith('.gz') ? zlib.gunzipSync(buf) : buf;
}

function findIdxFile(dir: string, stem: string): string {
  for (const candidate of [stem, `${stem}.gz`]) {
    const p = path.join(dir, candidate);
    if (fs.existsSync(p)) return p;
  }
  throw new Error(`${dir}: missing ${stem}[.gz]`);
}

export function readIdxImages(filePath: string): { height: number; width: number; images: Float32Array[] } {
  const buf = maybeGunzip(filePath);
  if (buf.readUInt32BE(0) !== 0x00000803) throw new Error(`${filePath}: not an IDX image file`);
  const n = buf.readUInt32BE(4);
  const height = buf.readUInt32BE(8);
  const width = buf.readUInt32BE(12);
  const images: Float32Array[] = [];
  let offset = 16;
  for (let i = 0; i < n; i++) {
    const img = new Float32Array(height * width);
    for (let p = 0; p < img.length; p++) img[p] = buf[offset + p];
    images.push(img);
    offset += height * width;
  }
  return { height, width, images };
}

export function readIdxLabels(filePath: string): number[] {
  const buf = maybeGunzip(filePath);
  if (buf.readUInt32BE(0) !== 0x00000801) throw new Error(`${filePath}: not an IDX label file`);
  const n = buf.readUInt32BE(4);
  return Array.from(buf.subarray(8, 8 + n));
}

function loadIdxDataset(dir: string, name: string): RawDataset {
  const { height, width, images } = readIdxImages(findIdxFile(dir, 'train-images-idx3-ubyte'));
  const labels = readIdxLabels(findIdxFile(dir, 'train-labels-idx1-ubyte'));
  return { name, height, width, channels: 1, images, labels };
}

function loadCifar10(dir: string): RawDataset {
  const images: Float32Array[] = [];
  const labels: number[] = [];
  const record = 1 + 3 * 32 * 32;
  for (let batch = 1; batch <= 5; batch++) {
    const p = path.join(dir, `data_batch_${batch}.bin`);
    if (!fs.existsSync(p)) continue;
    const buf = fs.readFileSync(p);
    for (let off = 0; off + record <= buf.length; off += record) {
      labels.push(buf[off]);
      // channel-planar source -> channels-last
      const img = new Float32Array(32 * 32 * 3);
      for (let c = 0; c < 3; c++) {
        for (let pix = 0; pix < 32 * 32; pix++) {
          img[pix * 3 + c] = buf[off + 1 + c * 32 * 32 + pix];
        }
      }
      images.push(img);
    }
  }
  if (!images.length) throw new Error(`${dir}: no data_batch_*.bin files`);
  return { name: 'cifar10', height: 32, width: 32, channels: 3, images, labels };
}

function listPngs(dir: string): string[] {
  return fs
    .readdirSync(dir)
    .filter((f) => f.toLowerCase().endsWith('.png'))
    .sort();
}

function decodePng(filePath: string): { height: number; width: number; channels: number; pixels: Float32Array } {
  const png = PNG.sync.read(fs.readFileSync(filePath));
  const pixels = new Float32Array(png.height * png.width * 3);
  for (let i = 0; i < png.height * png.width; i++) {
    pixels[3 * i] = png.data[4 * i];
    pixels[3 * i + 1] = png.data[4 * i + 1];
    pixels[3 * i + 2] = png.data[4 * i + 2];
  }
  return { height: png.height, width: png.width, channels: 3, pixels };
}

function loadPngFolder(dir: string, name: string): RawDataset {
  const entries = fs.readdirSync(dir, { withFileTypes: true });
  const classDirs = entries.filter((e) => e.isDirectory()).map((e) => e.name).sort();
  const files: Array<{ path: string; label?: number }> = [];
  if (classDirs.length) {
    classDirs.forEach((cls, idx) => {
      for (const f of listPngs(path.join(dir, cls))) {
        files.push({ path: path.join(dir, cls, f), label: idx });
      }
    });
  } else {
    for (const f of listPngs(dir)) files.push({ path: path.join(dir, f) });
  }
  if (!files.length) throw new Error(`${dir}: no .png files`);

  const images: Float32Array[] = [];
  const labels: number[] = [];
  let height = 0;
  let width = 0;
  for (const file of files) {
    let decoded;
    try {
      decoded = decodePng(file.path);
    } catch (err) {
      // Decode failures are logged and the job continues.
      process.stderr.write(`skipping ${file.path}: ${(err as Error).message}\n`);
      continue;
    }
    if (!images.length) {
      height = decoded.height;
      width = decoded.width;
    } else if (decoded.height !== height || decoded.width !== width) {
      process.stderr.write(`skipping ${file.path}: size ${decoded.height}x${decoded.width} != ${height}x${width}\n`);
      continue;
    }
    images.push(decoded.pixels);
    if (file.label !== undefined) labels.push(file.label);
  }
  if (!images.length) throw new Error(`${dir}: every file failed to decode`);
  return {
    name,
    height,
    width,
    channels: 3,
    images,
    labels: classDirs.length ? labels : undefined,
  };
}

export interface LoadOptions {
  dataDir: string;
  seed: number | bigint;
  /** pool size for generated noise datasets */
  noiseCount: number;
  noiseHeight: number;
  noiseWidth: number;
}

export function loadDataset(name: string, opts: LoadOptions): RawDataset {
  const key = name.toLowerCase().replace(/[-_ ]/g, '');
  if (key === 'gaussian' || key === 'gn') {
    return genGaussianNoise(opts.noiseCount, opts.noiseHeight, opts.noiseWidth, opts.seed);
  }
  if (key === 'saltpepper' || key === 'sapn') {
    return genSaltPepper(opts.noiseCount, opts.noiseHeight, opts.noiseWidth, opts.seed);
  }
  const dir = path.join(opts.dataDir, name);
  if (!fs.existsSync(dir)) throw new Error(`${dir}: dataset directory not found`);
  if (key === 'mnist' || key === 'fashionmnist') return loadIdxDataset(dir, key);
  if (key === 'cifar10') return loadCifar10(dir);
  return loadPngFolder(dir, key);
}
