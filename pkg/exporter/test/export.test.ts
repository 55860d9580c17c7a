import assert from 'node:assert/strict';
import { test } from 'node:test';
import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';
import { PNG } from 'pngjs';

import { readFeatures, readLabels } from '../src/ddim';
import { runExport, selectSubset } from '../src/export';
import { genGaussianNoise } from '../src/datasets';
import { FeatureExtractor, FEATURE_DIM, INPUT_SIZE } from '../src/model';

function tmpDir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), 'export-'));
}

test('extractor emits 512 deterministic features', () => {
  const a = FeatureExtractor.seeded(0);
  const b = FeatureExtractor.seeded(0);
  const img = new Float32Array(INPUT_SIZE * INPUT_SIZE * 3).fill(0.5);
  const fa = a.forward(img);
  const fb = b.forward(img);
  assert.equal(fa.length, FEATURE_DIM);
  assert.deepEqual(Array.from(fa), Array.from(fb));
  const other = img.slice();
  other[0] = -3;
  other[500] = 2;
  const fo = a.forward(other);
  assert.notDeepEqual(Array.from(fo), Array.from(fa));
  for (const v of fa) assert.ok(Number.isFinite(v));
});

test('weights save/load reproduces outputs exactly', () => {
  const dir = tmpDir();
  const weightsPath = path.join(dir, 'w.ddwt');
  const seeded = FeatureExtractor.seeded(3);
  seeded.saveWeights(weightsPath);
  const loaded = FeatureExtractor.fromFile(weightsPath);
  const img = new Float32Array(INPUT_SIZE * INPUT_SIZE * 3).map((_, i) => Math.sin(i / 7));
  assert.deepEqual(Array.from(loaded.forward(img)), Array.from(seeded.forward(img)));
});

test('subset selection is deterministic and within range', () => {
  const ds = genGaussianNoise(50, 4, 4, 1);
  const a = selectSubset(ds, 20, 9);
  const b = selectSubset(ds, 20, 9);
  assert.deepEqual(a, b);
  assert.equal(new Set(a).size, 20);
  assert.throws(() => selectSubset(ds, 51, 9), /exceeds/);
});

test('noise export meets the shape contract and is byte-identical on rerun', () => {
  const dir = tmpDir();
  const out1 = path.join(dir, 'gn1.ddim');
  const out2 = path.join(dir, 'gn2.ddim');
  const job = { dataset: 'gaussian', limit: 12, seed: 5, dataDir: dir, noiseCount: 40 };
  const s1 = runExport({ ...job, out: out1 });
  const s2 = runExport({ ...job, out: out2 });
  assert.equal(s1.n, 12);
  assert.equal(s1.d, 512);
  assert.equal(s1.labelled, false);
  assert.deepEqual(fs.readFileSync(out1), fs.readFileSync(out2));
  const m = readFeatures(out1);
  assert.equal(m.n, 12);
  assert.equal(m.d, 512);
});

function writePngClassFolder(root: string): void {
  for (const [cls, value] of [['zero', 30], ['one', 220]] as Array<[string, number]>) {
    fs.mkdirSync(path.join(root, cls), { recursive: true });
    for (let i = 0; i < 4; i++) {
      const png = new PNG({ width: 10, height: 10 });
      for (let p = 0; p < 100; p++) {
        png.data[4 * p] = (value + 10 * i) % 256;
        png.data[4 * p + 1] = value;
        png.data[4 * p + 2] = 255 - value;
        png.data[4 * p + 3] = 255;
      }
      fs.writeFileSync(path.join(root, cls, `img${i}.png`), PNG.sync.write(png));
    }
  }
}

test('labelled image export writes the sidecar and resizes', () => {
  const dir = tmpDir();
  writePngClassFolder(path.join(dir, 'tinyimagenet'));
  const out = path.join(dir, 'ti.ddim');
  const summary = runExport({ dataset: 'tinyimagenet', limit: 6, out, seed: 2, dataDir: dir });
  assert.equal(summary.n, 6);
  assert.equal(summary.labelled, true);
  const m = readFeatures(out);
  assert.equal(m.d, 512);
  const labels = readLabels(out, 6);
  for (const l of labels) assert.ok(l === 0 || l === 1);
});

test('different seeds select different subsets', () => {
  const dir = tmpDir();
  const outA = path.join(dir, 'a.ddim');
  const outB = path.join(dir, 'b.ddim');
  runExport({ dataset: 'saltpepper', limit: 10, out: outA, seed: 1, dataDir: dir, noiseCount: 200 });
  runExport({ dataset: 'saltpepper', limit: 10, out: outB, seed: 2, dataDir: dir, noiseCount: 200 });
  assert.notDeepEqual(fs.readFileSync(outA), fs.readFileSync(outB));
});
