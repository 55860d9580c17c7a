/**
 * The feature extractor: a small wide-residual convolutional network whose
 * global-average-pooled final stage yields exactly 512 features.
 *
 * Architecture (channels-last, input 32x32x3): a 3x3 stem to 16 channels,
 * then three residual groups 16->32, 32->64 and 64->512, each one basic
 * block (two 3x3 convolutions with a 1x1 strided projection shortcut) at
 * stride 2, ReLU activations, global average pooling over the final 4x4
 * map.
 *
 * Weights load from a file when pretrained parameters are available (format
 * below); otherwise they are drawn He-normal from the shared deterministic
 * generator, which keeps exports reproducible and still yields a usable
 * random-projection feature space.  Either way the network is fixed at
 * export time; this tool never trains.
 *
 * Weights file ("ddwt"): magic "DDWT", version u16 = 1, tensor count u32,
 * then per tensor: name length u16 + UTF-8 name, rank u8, dims u32 each,
 * float32 data (all little endian).
 */

import * as fs from 'fs';

import { Stream } from './rng';

export const INPUT_SIZE = 32;
export const FEATURE_DIM = 512;

const WEIGHTS_MAGIC = 'DDWT';
const WEIGHTS_VERSION = 1;

interface ConvLayer {
  name: string;
  inC: number;
  outC: number;
  kernel: number;
  stride: number;
  /** [ky][kx][inC][outC] flattened */
  weights: Float32Array;
}

interface BlockSpec {
  name: string;
  inC: number;
  outC: number;
  stride: number;
}

const BLOCKS: BlockSpec[] = [
  { name: 'g1', inC: 16, outC: 32, stride: 2 },
  { name: 'g2', inC: 32, outC: 64, stride: 2 },
  { name: 'g3', inC: 64, outC: FEATURE_DIM, stride: 2 },
];

function conv2d(
  input: Float32Array,
  h: number,
  w: number,
  layer: ConvLayer,
): { out: Float32Array; h: number; w: number } {
  const { inC, outC, kernel, stride, weights } = layer;
  const pad = kernel === 1 ? 0 : 1;
  const outH = Math.floor((h + 2 * pad - kernel) / stride) + 1;
  const outW = Math.floor((w + 2 * pad - kernel) / stride) + 1;
  const out = new Float32Array(outH * outW * outC);
  for (let oy = 0; oy < outH; oy++) {
    for (let ox = 0; ox < outW; ox++) {
      const base = (oy * outW + ox) * outC;
      for (let ky = 0; ky < kernel; ky++) {
        const iy = oy * stride + ky - pad;
        if (iy < 0 || iy >= h) continue;
        for (let kx = 0; kx < kernel; kx++) {
          const ix = ox * stride + kx - pad;
          if (ix < 0 || ix >= w) continue;
          const inBase = (iy * w + ix) * inC;
          const wBase = ((ky * kernel + kx) * inC) * outC;
          for (let c = 0; c < inC; c++) {
            const v = input[inBase + c];
            if (v === 0) continue;
            const wOff = wBase + c * outC;
            for (let o = 0; o < outC; o++) {
              out[base + o] += v * weights[wOff + o];
            }
          }
        }
      }
    }
  }
  return { out, h: outH, w: outW };
}

function reluInPlace(x: Float32Array): void {
  for (let i = 0; i < x.length; i++) if (x[i] < 0) x[i] = 0;
}

export class FeatureExtractor {
  private layers: Map<string, ConvLayer>;

  private constructor(layers: Map<string, ConvLayer>) {
    this.layers = layers;
  }

  static layerSpecs(): Array<{ name: string; inC: number; outC: number; kernel: number; stride: number }> {
    const specs = [{ name: 'stem', inC: 3, outC: 16, kernel: 3, stride: 1 }];
    for (const block of BLOCKS) {
      specs.push({ name: `${block.name}.conv1`, inC: block.inC, outC: block.outC, kernel: 3, stride: block.stride });
      specs.push({ name: `${block.name}.conv2`, inC: block.outC, outC: block.outC, kernel: 3, stride: 1 });
      specs.push({ name: `${block.name}.proj`, inC: block.inC, outC: block.outC, kernel: 1, stride: block.stride });
    }
    return specs;
  }

  /** He-normal weights from the shared deterministic generator. */
  static seeded(seed: number | bigint): FeatureExtractor {
    const root = new Stream(seed).child('extractor');
    const layers = new Map<string, ConvLayer>();
    for (const spec of FeatureExtractor.layerSpecs()) {
      const fanIn = spec.kernel * spec.kernel * spec.inC;
      const scale = Math.sqrt(2 / fanIn);
      const count = spec.kernel * spec.kernel * spec.inC * spec.outC;
      const z = root.child(spec.name).normals(count);
      const weights = new Float32Array(count);
      for (let i = 0; i < count; i++) weights[i] = z[i] * scale;
      layers.set(spec.name, { ...spec, weights });
    }
    return new FeatureExtractor(layers);
  }

  static fromFile(path: string): FeatureExtractor {
    const buf = fs.readFileSync(path);
    if (buf.toString('ascii', 0, 4) !== WEIGHTS_MAGIC) throw new Error(`${path}: bad magic`);
    if (buf.readUInt16LE(4) !== WEIGHTS_VERSION) throw new Error(`${path}: unsupported version`);
    const count = buf.readUInt32LE(6);
    let off = 10;
    const tensors = new Map<string, { dims: number[]; data: Float32Array }>();
    for (let t = 0; t < count; t++) {
      const nameLen = buf.readUInt16LE(off);
      off += 2;
      const name = buf.toString('utf8', off, off + nameLen);
      off += nameLen;
      const rank = buf.readUInt8(off);
      off += 1;
      const dims: number[] = [];
      for (let r = 0; r < rank; r++) {
        dims.push(buf.readUInt32LE(off));
        off += 4;
      }
      const size = dims.reduce((a, b) => a * b, 1);
      const data = new Float32Array(size);
      for (let i = 0; i < size; i++) data[i] = buf.readFloatLE(off + 4 * i);
      off += 4 * size;
      tensors.set(name, { dims, data });
    }
    const layers = new Map<string, ConvLayer>();
    for (const spec of FeatureExtractor.layerSpecs()) {
      const tensor = tensors.get(spec.name);
      if (!tensor) throw new Error(`${path}: missing tensor ${spec.name}`);
      const expect = [spec.kernel, spec.kernel, spec.inC, spec.outC];
      if (tensor.dims.join('x') !== expect.join('x')) {
        throw new Error(`${path}: ${spec.name} has dims ${tensor.dims.join('x')}, expected ${expect.join('x')}`);
      }
      layers.set(spec.name, { ...spec, weights: tensor.data });
    }
    return new FeatureExtractor(layers);
  }

  saveWeights(path: string): void {
    const specs = FeatureExtractor.layerSpecs();
    const chunks: Buffer[] = [];
    const header = Buffer.alloc(10);
    header.write(WEIGHTS_MAGIC, 0, 'ascii');
    header.writeUInt16LE(WEIGHTS_VERSION, 4);
    header.writeUInt32LE(specs.length, 6);
    chunks.push(header);
    for (const spec of specs) {
      const layer = this.layers.get(spec.name)!;
      const name = Buffer.from(spec.name, 'utf8');
      const meta = Buffer.alloc(2 + name.length + 1 + 16);
      meta.writeUInt16LE(name.length, 0);
      name.copy(meta, 2);
      let off = 2 + name.length;
      meta.writeUInt8(4, off);
      off += 1;
      for (const dim of [spec.kernel, spec.kernel, spec.inC, spec.outC]) {
        meta.writeUInt32LE(dim, off);
        off += 4;
      }
      const data = Buffer.alloc(4 * layer.weights.length);
      for (let i = 0; i < layer.weights.length; i++) data.writeFloatLE(layer.weights[i], 4 * i);
      chunks.push(meta, data);
    }
    fs.writeFileSync(path, Buffer.concat(chunks));
  }

  /** image: standardized 32x32x3 channels-last; returns 512 pooled features. */
  forward(image: Float32Array): Float32Array {
    if (image.length !== INPUT_SIZE * INPUT_SIZE * 3) {
      throw new Error(`expected ${INPUT_SIZE * INPUT_SIZE * 3} values, got ${image.length}`);
    }
    let act = conv2d(image, INPUT_SIZE, INPUT_SIZE, this.layers.get('stem')!);
    reluInPlace(act.out);
    for (const block of BLOCKS) {
      const main1 = conv2d(act.out, act.h, act.w, this.layers.get(`${block.name}.conv1`)!);
      reluInPlace(main1.out);
      const main2 = conv2d(main1.out, main1.h, main1.w, this.layers.get(`${block.name}.conv2`)!);
      const short = conv2d(act.out, act.h, act.w, this.layers.get(`${block.name}.proj`)!);
      for (let i = 0; i < main2.out.length; i++) main2.out[i] += short.out[i];
      reluInPlace(main2.out);
      act = main2;
    }
    const pooled = new Float32Array(FEATURE_DIM);
    const pixels = act.h * act.w;
    for (let p = 0; p < pixels; p++) {
      for (let c = 0; c < FEATURE_DIM; c++) pooled[c] += act.out[p * FEATURE_DIM + c];
    }
    for (let c = 0; c < FEATURE_DIM; c++) pooled[c] = Math.fround(pooled[c] / pixels);
    return pooled;
  }
}
