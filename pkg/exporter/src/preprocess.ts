/**
 * Image preprocessing: bilinear resize to the extractor's input size,
 * grayscale replication to three channels, and standardization with one
 * (mean, std) pair computed from the sampled subset itself.
 */

export function bilinearResize(
  src: Float32Array,
  srcH: number,
  srcW: number,
  channels: number,
  dstH: number,
  dstW: number,
): Float32Array {
  if (srcH === dstH && srcW === dstW) return src.slice();
  const out = new Float32Array(dstH * dstW * channels);
  const scaleY = srcH / dstH;
  const scaleX = srcW / dstW;
  for (let y = 0; y < dstH; y++) {
    const sy = Math.min(Math.max((y + 0.5) * scaleY - 0.5, 0), srcH - 1);
    const y0 = Math.floor(sy);
    const y1 = Math.min(srcH - 1, y0 + 1);
    const fy = sy - y0;
    for (let x = 0; x < dstW; x++) {
      const sx = Math.min(Math.max((x + 0.5) * scaleX - 0.5, 0), srcW - 1);
      const x0 = Math.floor(sx);
      const x1 = Math.min(srcW - 1, x0 + 1);
      const fx = sx - x0;
      for (let c = 0; c < channels; c++) {
        const v00 = src[(y0 * srcW + x0) * channels + c];
        const v01 = src[(y0 * srcW + x1) * channels + c];
        const v10 = src[(y1 * srcW + x0) * channels + c];
        const v11 = src[(y1 * srcW + x1) * channels + c];
        const top = v00 + (v01 - v00) * fx;
        const bottom = v10 + (v11 - v10) * fx;
        out[(y * dstW + x) * channels + c] = top + (bottom - top) * fy;
      }
    }
  }
  return out;
}

export function toThreeChannels(src: Float32Array, pixels: number, channels: number): Float32Array {
  if (channels === 3) return src;
  if (channels !== 1) throw new Error(`unsupported channel count ${channels}`);
  const out = new Float32Array(pixels * 3);
  for (let i = 0; i < pixels; i++) {
    out[3 * i] = src[i];
    out[3 * i + 1] = src[i];
    out[3 * i + 2] = src[i];
  }
  return out;
}

export function subsetMeanStd(images: Float32Array[]): { mean: number; std: number } {
  let count = 0;
  let sum = 0;
  for (const img of images) {
    for (let i = 0; i < img.length; i++) sum += img[i];
    count += img.length;
  }
  const mean = sum / count;
  let sq = 0;
  for (const img of images) {
    for (let i = 0; i < img.length; i++) {
      const d = img[i] - mean;
      sq += d * d;
    }
  }
  const std = Math.sqrt(sq / count);
  return { mean, std };
}

export function standardizeInPlace(images: Float32Array[], mean: number, std: number): void {
  const safe = std === 0 ? 1 : std;
  for (const img of images) {
    for (let i = 0; i < img.length; i++) {
      img[i] = std === 0 ? 0 : (img[i] - mean) / safe;
    }
  }
}
