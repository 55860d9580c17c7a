#!/usr/bin/env node
/**
 * ddim-export: write image-dataset features in the ddim binary format.
 *
 *   export --dataset NAME --limit N --out PATH [--seed S] [--data-dir D]
 *          [--weights W.ddwt] [--noise-count N] [--save-weights PATH]
 *
 * Exit codes: 0 success, 1 usage error, 2 data error.
 */

import { runExport } from './export';
import { FeatureExtractor } from './model';

interface Flags {
  [key: string]: string;
}

const KNOWN = new Set([
  '--dataset',
  '--limit',
  '--out',
  '--seed',
  '--data-dir',
  '--weights',
  '--noise-count',
  '--save-weights',
]);

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!KNOWN.has(key)) throw new UsageError(`unknown flag ${key}`);
    const value = argv[i + 1];
    if (value === undefined) throw new UsageError(`missing value for ${key}`);
    flags[key] = value;
  }
  return flags;
}

class UsageError extends Error {}

function usage(): string {
  return (
    'usage: ddim-export export --dataset NAME --limit N --out PATH\n' +
    '                   [--seed S=0] [--data-dir D=./data] [--weights W]\n' +
    '                   [--noise-count N] [--save-weights PATH]\n' +
    'datasets: mnist fashionmnist cifar10 gaussian saltpepper, or any PNG folder name\n'
  );
}

function main(argv: string[]): number {
  try {
    const [command, ...rest] = argv;
    if (command === undefined || command === '--help' || command === '-h') {
      process.stdout.write(usage());
      return command === undefined ? 1 : 0;
    }
    if (command !== 'export') throw new UsageError(`unknown command ${command}`);
    const flags = parseFlags(rest);

    if (flags['--save-weights'] !== undefined && flags['--dataset'] === undefined) {
      const seed = Number(flags['--seed'] ?? '0');
      FeatureExtractor.seeded(seed).saveWeights(flags['--save-weights']);
      process.stdout.write(JSON.stringify({ saved_weights: flags['--save-weights'], seed }, null, 2) + '\n');
      return 0;
    }

    for (const required of ['--dataset', '--limit', '--out']) {
      if (flags[required] === undefined) throw new UsageError(`${required} is required`);
    }
    const limit = Number(flags['--limit']);
    if (!Number.isInteger(limit) || limit < 1) throw new UsageError('--limit must be a positive integer');
    const seed = Number(flags['--seed'] ?? '0');
    if (!Number.isInteger(seed)) throw new UsageError('--seed must be an integer');

    const summary = runExport({
      dataset: flags['--dataset'],
      limit,
      out: flags['--out'],
      seed,
      dataDir: flags['--data-dir'] ?? 'data',
      weights: flags['--weights'],
      noiseCount: flags['--noise-count'] !== undefined ? Number(flags['--noise-count']) : undefined,
    });
    const config = {
      dataset: flags['--dataset'],
      limit,
      out: flags['--out'],
      seed,
      data_dir: flags['--data-dir'] ?? 'data',
      weights: flags['--weights'] ?? null,
      noise_count: flags['--noise-count'] !== undefined ? Number(flags['--noise-count']) : null,
    };
    process.stdout.write(JSON.stringify({ config, summary }, null, 2) + '\n');
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`usage error: ${err.message}\n${usage()}`);
      return 1;
    }
    process.stderr.write(`data error: ${(err as Error).message}\n`);
    return 2;
  }
}

process.exit(main(process.argv.slice(2)));
