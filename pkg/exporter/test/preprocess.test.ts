import assert from 'node:assert/strict';
import { test } from 'node:test';

import { bilinearResize, standardizeInPlace, subsetMeanStd, toThreeChannels } from '../src/preprocess';

test('resize to the same size is a copy', () => {
  const src = new Float32Array([1, 2, 3, 4]);
  const out = bilinearResize(src, 2, 2, 1, 2, 2);
  assert.deepEqual(Array.from(out), [1, 2, 3, 4]);
  assert.notEqual(out, src);
});

test('downscale of a constant image stays constant', () => {
  const src = new Float32Array(8 * 8 * 3).fill(9);
  const out = bilinearResize(src, 8, 8, 3, 4, 4);
  assert.equal(out.length, 4 * 4 * 3);
  for (const v of out) assert.equal(v, 9);
});

test('upscale interpolates between corners', () => {
  const src = new Float32Array([0, 100]);
  const out = bilinearResize(src, 1, 2, 1, 1, 4);
  assert.equal(out.length, 4);
  assert.ok(out[0] <= out[1] && out[1] <= out[2] && out[2] <= out[3]);
  assert.equal(out[0], 0);
  assert.equal(out[3], 100);
});

test('grayscale replication to three channels', () => {
  const out = toThreeChannels(new Float32Array([5, 7]), 2, 1);
  assert.deepEqual(Array.from(out), [5, 5, 5, 7, 7, 7]);
  const passthrough = new Float32Array([1, 2, 3]);
  assert.equal(toThreeChannels(passthrough, 1, 3), passthrough);
});

test('subset standardization produces zero mean and unit std', () => {
  const images = [new Float32Array([0, 2, 4]), new Float32Array([6, 8, 10])];
  const { mean, std } = subsetMeanStd(images);
  assert.equal(mean, 5);
  standardizeInPlace(images, mean, std);
  // values live in Float32Arrays, so compare at float32 precision
  let sum = 0;
  let sq = 0;
  for (const img of images) for (const v of img) (sum += v), (sq += v * v);
  assert.ok(Math.abs(sum / 6) < 1e-6);
  assert.ok(Math.abs(sq / 6 - 1) < 1e-6);
});

test('zero-variance subsets map to zeros', () => {
  const images = [new Float32Array([3, 3])];
  const { mean, std } = subsetMeanStd(images);
  standardizeInPlace(images, mean, std);
  assert.deepEqual(Array.from(images[0]), [0, 0]);
});
