/**
 * The export pipeline: pick a dataset, sub-sample `limit` images with the
 * shared deterministic generator, resize to the extractor's input, replicate
 * grayscale to three channels, standardize with the sampled subset's own
 * (mean, std) pair, run the network, and write the pooled features in the
 * ddim format (labels sidecar included when the source has labels).
 */

import { writeFeatures, writeLabels } from './ddim';
import { loadDataset, RawDataset } from './datasets';
import { FeatureExtractor, FEATURE_DIM, INPUT_SIZE } from './model';
import { bilinearResize, standardizeInPlace, subsetMeanStd, toThreeChannels } from './preprocess';
import { Stream } from './rng';

export interface ExportJob {
  dataset: string;
  limit: number;
  out: string;
  seed: number;
  dataDir: string;
  /** optional pretrained weights ("ddwt"); seeded surrogate otherwise */
  weights?: string;
  /** generated pool size for noise datasets */
  noiseCount?: number;
}

export interface ExportSummary {
  dataset: string;
  n: number;
  d: number;
  out: string;
  labelled: boolean;
  mean: number;
  std: number;
}

export function selectSubset(dataset: RawDataset, limit: number, seed: number | bigint): number[] {
  if (limit < 1) throw new Error('limit must be >= 1');
  const n = dataset.images.length;
  if (limit > n) throw new Error(`limit ${limit} exceeds available ${n} images`);
  const idx = new Stream(seed).child('subsample').sampleWithoutReplacement(n, limit);
  return Array.from(idx);
}

export function runExport(job: ExportJob): ExportSummary {
  const dataset = loadDataset(job.dataset, {
    dataDir: job.dataDir,
    seed: job.seed,
    noiseCount: job.noiseCount ?? Math.max(job.limit, 2000),
    noiseHeight: INPUT_SIZE,
    noiseWidth: INPUT_SIZE,
  });
  const picked = selectSubset(dataset, job.limit, job.seed);

  const prepared: Float32Array[] = [];
  for (const i of picked) {
    const resized = bilinearResize(
      dataset.images[i],
      dataset.height,
      dataset.width,
      dataset.channels,
      INPUT_SIZE,
      INPUT_SIZE,
    );
    prepared.push(toThreeChannels(resized, INPUT_SIZE * INPUT_SIZE, dataset.channels));
  }
  const { mean, std } = subsetMeanStd(prepared);
  standardizeInPlace(prepared, mean, std);

  const extractor = job.weights
    ? FeatureExtractor.fromFile(job.weights)
    : FeatureExtractor.seeded(0);

  const data = new Float32Array(prepared.length * FEATURE_DIM);
  prepared.forEach((img, row) => {
    data.set(extractor.forward(img), row * FEATURE_DIM);
  });
  writeFeatures({ n: prepared.length, d: FEATURE_DIM, data }, job.out);

  const labelled = dataset.labels !== undefined;
  if (dataset.labels) {
    writeLabels(picked.map((i) => dataset.labels![i]), job.out);
  }
  return {
    dataset: dataset.name,
    n: prepared.length,
    d: FEATURE_DIM,
    out: job.out,
    labelled,
    mean,
    std,
  };
}
