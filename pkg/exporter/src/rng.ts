/**
 * Deterministic random streams: xoshiro256** seeded through SplitMix64.
 *
 * This is a line-for-line port of the generator used by the core package so
 * that subsample selections and noise datasets agree across both tools.
 * Integer and uniform draws are bit-exact with the reference; draws passing
 * through transcendental functions (normals, gamma, beta) agree up to the
 * platform's libm rounding.
 */

const MASK = (1n << 64n) - 1n;
const GOLDEN = 0x9e3779b97f4a7c15n;

function mix64(z: bigint): bigint {
  z &= MASK;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK;
  return z ^ (z >> 31n);
}

function fold(part: number | bigint | string): bigint {
  if (typeof part === 'string') {
    let h = 0xcbf29ce484222325n;
    for (const byte of Buffer.from(part, 'utf8')) {
      h = ((h ^ BigInt(byte)) * 0x100000001b3n) & MASK;
    }
    return h;
  }
  const v = typeof part === 'bigint' ? part : BigInt(Math.trunc(part));
  return ((v % (MASK + 1n)) + (MASK + 1n)) & MASK;
}

function rotl(x: bigint, k: bigint): bigint {
  return ((x << k) | (x >> (64n - k))) & MASK;
}

export class Stream {
  readonly key: bigint;
  private s0: bigint;
  private s1: bigint;
  private s2: bigint;
  private s3: bigint;

  constructor(key: number | bigint) {
    this.key = fold(key);
    const s: bigint[] = [];
    for (let i = 1n; i <= 4n; i++) {
      s.push(mix64((this.key + i * GOLDEN) & MASK));
    }
    if (s[0] === 0n && s[1] === 0n && s[2] === 0n && s[3] === 0n) s[0] = 1n;
    [this.s0, this.s1, this.s2, this.s3] = s;
  }

  child(...parts: Array<number | bigint | string>): Stream {
    let k = this.key;
    for (const part of parts) {
      k = mix64(((k + GOLDEN) & MASK) ^ fold(part));
    }
    return new Stream(k);
  }

  nextU64(): bigint {
    const out = (rotl((this.s1 * 5n) & MASK, 7n) * 9n) & MASK;
    const t = (this.s1 << 17n) & MASK;
    this.s2 ^= this.s0;
    this.s3 ^= this.s1;
    this.s1 ^= this.s2;
    this.s0 ^= this.s3;
    this.s2 ^= t;
    this.s3 = rotl(this.s3, 45n);
    return out;
  }

  uniform(): number {
    return Number(this.nextU64() >> 11n) * 2 ** -53;
  }

  uniforms(n: number): Float64Array {
    const out = new Float64Array(n);
    for (let i = 0; i < n; i++) out[i] = this.uniform();
    return out;
  }

  below(bound: number): number {
    if (bound <= 0) throw new RangeError('bound must be positive');
    const b = BigInt(bound);
    const limit = ((1n << 64n) / b) * b;
    for (;;) {
      const u = this.nextU64();
      if (u < limit) return Number(u % b);
    }
  }

  permutation(n: number): Int32Array {
    return this.sampleWithoutReplacement(n, n);
  }

  /** First k entries of a front-to-back Fisher-Yates shuffle of 0..n-1. */
  sampleWithoutReplacement(n: number, k: number): Int32Array {
    if (k < 0 || k > n) throw new RangeError(`cannot draw ${k} of ${n}`);
    const arr = new Int32Array(n);
    for (let i = 0; i < n; i++) arr[i] = i;
    const steps = Math.min(k, n - 1);
    for (let i = 0; i < steps; i++) {
      const j = i + this.below(n - i);
      const tmp = arr[i];
      arr[i] = arr[j];
      arr[j] = tmp;
    }
    return arr.slice(0, k);
  }

  /** Box-Muller pairs; an odd count discards the sine member of the last pair. */
  normals(n: number): Float64Array {
    const m = Math.ceil(n / 2);
    const u1 = this.uniforms(m);
    const u2 = this.uniforms(m);
    const out = new Float64Array(2 * m);
    for (let i = 0; i < m; i++) {
      const r = Math.sqrt(-2 * Math.log1p(-u1[i]));
      const theta = 2 * Math.PI * u2[i];
      out[2 * i] = r * Math.cos(theta);
      out[2 * i + 1] = r * Math.sin(theta);
    }
    return out.slice(0, n);
  }

  normal(): number {
    return this.normals(1)[0];
  }

  /** Marsaglia-Tsang; shapes below one use the boosted recursion. */
  gamma(shape: number): number {
    if (shape <= 0) throw new RangeError('shape must be positive');
    if (shape < 1) {
      const boost = (1 - this.uniform()) ** (1 / shape);
      return this.gamma(shape + 1) * boost;
    }
    const d = shape - 1 / 3;
    const c = 1 / Math.sqrt(9 * d);
    for (;;) {
      const x = this.normal();
      const v = (1 + c * x) ** 3;
      if (v <= 0) continue;
      const u = 1 - this.uniform();
      if (u < 1 - 0.0331 * x ** 4) return d * v;
      if (Math.log(u) < 0.5 * x * x + d * (1 - v + Math.log(v))) return d * v;
    }
  }

  beta(a: number, b: number): number {
    const x = this.gamma(a);
    const y = this.gamma(b);
    return x / (x + y);
  }
}
