"""Deterministic random streams shared by every tool in this project.

The generator is xoshiro256** (Blackman/Vigna), a shift-register generator
over four 64-bit words, seeded through the SplitMix64 mixing function.  The
full algorithm is written out here so that sibling tools in other languages
can reproduce the draws:

* ``mix64(z)``: ``z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64``;
  ``z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64``; result is
  ``z ^ (z >> 31)``.
* State init from a 64-bit ``key``: ``k_i = (key + (i+1)*0x9E3779B97F4A7C15)
  mod 2**64`` and ``s_i = mix64(k_i)`` for i = 0..3.  An all-zero state is
  replaced by ``s_0 = 1``.
* Step: ``out = rotl(s1 * 5, 7) * 9``; ``t = s1 << 17``; ``s2 ^= s0``;
  ``s3 ^= s1``; ``s1 ^= s2``; ``s0 ^= s3``; ``s2 ^= t``; ``s3 = rotl(s3, 45)``
  (all mod 2**64, ``rotl`` a 64-bit left rotation).
* Substreams: ``child_key = mix64(((key + 0x9E3779B97F4A7C15) mod 2**64) ^
  fold(part))`` applied left to right over the parts.  ``fold`` is identity
  (mod 2**64) for integers and FNV-1a 64 over UTF-8 bytes for strings.
* ``uniform() = (next_u64() >> 11) * 2**-53`` in [0, 1).
* ``normals(n)``: Box-Muller pairs.  For each pair, draw u1 then u2;
  ``r = sqrt(-2 ln(1 - u1))``; the pair is ``(r cos(2 pi u2), r sin(2 pi u2))``.
  An odd count discards the sine member of the last pair.  ``normal()`` is
  ``normals(1)[0]`` and therefore always consumes exactly two uniforms.
* ``below(n)``: draw 64-bit words, rejecting values >= ``floor(2**64 / n) * n``,
  and return the first accepted word mod n (unbiased).
* ``permutation(n)`` / ``sample_without_replacement(n, k)``: Fisher-Yates
  from the front, ``j = i + below(n - i)`` for i = 0, 1, ...; the sample is
  the first k entries of the partially shuffled identity array.
* ``gamma(a)``: Marsaglia-Tsang.  For a >= 1, loop { x = normal();
  v = (1 + x / sqrt(9d))**3 with d = a - 1/3; reject v <= 0; u = 1 - uniform();
  accept if u < 1 - 0.0331 x^4 or ln u < x^2/2 + d(1 - v + ln v); return d v }.
  For a < 1, return ``gamma(a + 1) * (1 - uniform())**(1/a)``.
* ``beta(a, b) = x / (x + y)`` with x = gamma(a), y = gamma(b), in that order.

Integer and uniform draws are bit-exact across conforming implementations.
Draws passing through libm (normal, gamma, beta) are reproducible up to the
platform's transcendental rounding.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _fold(part: int | str) -> int:
    if isinstance(part, str):
        h = 0xCBF29CE484222325
        for b in part.encode("utf-8"):
            h = ((h ^ b) * 0x100000001B3) & _MASK
        return h
    if isinstance(part, (bool, float)):
        raise TypeError(f"stream parts must be int or str, got {type(part).__name__}")
    return int(part) & _MASK


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class Stream:
    """One xoshiro256** stream identified by a 64-bit key.

    Streams are cheap; derive one per independent purpose via :meth:`child`
    so that draw order in one place never perturbs another.
    """

    __slots__ = ("key", "_s0", "_s1", "_s2", "_s3")

    def __init__(self, key: int):
        self.key = int(key) & _MASK
        s = [_mix64((self.key + (i + 1) * _GOLDEN) & _MASK) for i in range(4)]
        if not any(s):
            s[0] = 1
        self._s0, self._s1, self._s2, self._s3 = s

    def child(self, *parts: int | str) -> "Stream":
        """Derive an independent stream keyed by (this stream, *parts)."""
        k = self.key
        for part in parts:
            k = _mix64(((k + _GOLDEN) & _MASK) ^ _fold(part))
        return Stream(k)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        out = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return out

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniforms(self, n: int) -> np.ndarray:
        nxt = self.next_u64
        words = np.fromiter((nxt() >> 11 for _ in range(n)), dtype=np.uint64, count=n)
        return words.astype(np.float64) * 2.0**-53

    def below(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = ((1 << 64) // bound) * bound
        while True:
            u = self.next_u64()
            if u < limit:
                return u % bound

    def integers(self, bound: int, size: int) -> np.ndarray:
        return np.fromiter((self.below(bound) for _ in range(size)), dtype=np.int64, count=size)

    def permutation(self, n: int) -> np.ndarray:
        return self.sample_without_replacement(n, n)

    def sample_without_replacement(self, n: int, k: int) -> np.ndarray:
        """First k entries of a front-to-back Fisher-Yates shuffle of 0..n-1."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} of {n} without replacement")
        arr = list(range(n))
        for i in range(min(k, n - 1)):
            j = i + self.below(n - i)
            arr[i], arr[j] = arr[j], arr[i]
        return np.asarray(arr[:k], dtype=np.int64)

    def normals(self, n: int) -> np.ndarray:
        m = (n + 1) // 2
        u1 = self.uniforms(m)
        u2 = self.uniforms(m)
        r = np.sqrt(-2.0 * np.log1p(-u1))
        theta = (2.0 * math.pi) * u2
        out = np.empty(2 * m, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def normal(self) -> float:
        return float(self.normals(1)[0])

    def gamma(self, shape: float) -> float:
        if shape <= 0:
            raise ValueError("shape must be positive")
        if shape < 1.0:
            boost = (1.0 - self.uniform()) ** (1.0 / shape)
            return self.gamma(shape + 1.0) * boost
        d = shape - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            x = self.normal()
            v = (1.0 + c * x) ** 3
            if v <= 0.0:
                continue
            u = 1.0 - self.uniform()
            if u < 1.0 - 0.0331 * x**4:
                return d * v
            if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
                return d * v

    def beta(self, a: float, b: float) -> float:
        x = self.gamma(a)
        y = self.gamma(b)
        return x / (x + y)

    def betas(self, a: float, b: float, size: int) -> np.ndarray:
        return np.fromiter((self.beta(a, b) for _ in range(size)), dtype=np.float64, count=size)
