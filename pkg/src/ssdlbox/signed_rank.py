"""Two-sided Wilcoxon signed-rank test on paired samples.

Zero differences are dropped and tied absolute differences mid-ranked.  With
at most EXACT_LIMIT nonzero differences the p-value comes from the exact
sign-flip null distribution (computed by convolving the doubled ranks, which
are integers even under mid-ranking); larger samples use the normal
approximation with the standard tie correction.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DataError

EXACT_LIMIT = 25


def midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing the average of their positions."""
    values = np.asarray(values)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    i = 0
    n = values.shape[0]
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def wilcoxon_signed_rank(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise DataError(f"paired samples must be equal-length 1-d, got {x.shape} vs {y.shape}")
    if x.shape[0] < 1:
        raise DataError("need at least one pair")
    diff = x - y
    diff = diff[diff != 0.0]
    if diff.size == 0:
        return 1.0
    ranks = midranks(np.abs(diff))
    w_plus = float(ranks[diff > 0].sum())
    if diff.size <= EXACT_LIMIT:
        return _exact_two_sided(ranks, w_plus)
    return _normal_two_sided(np.abs(diff), ranks, w_plus)


def _exact_two_sided(ranks: np.ndarray, w_plus: float) -> float:
    r2 = np.rint(2.0 * ranks).astype(np.int64)
    total = int(r2.sum())
    counts: dict[int, int] = {0: 1}
    for r in r2:
        nxt: dict[int, int] = {}
        for s, c in counts.items():
            nxt[s] = nxt.get(s, 0) + c
            nxt[s + int(r)] = nxt.get(s + int(r), 0) + c
        counts = nxt
    w2 = int(round(2.0 * w_plus))
    hi = max(w2, total - w2)
    lo = min(w2, total - w2)
    favored = sum(c for s, c in counts.items() if s >= hi or s <= lo)
    return min(1.0, favored / float(2 ** len(r2)))


def _normal_two_sided(absdiff: np.ndarray, ranks: np.ndarray, w_plus: float) -> float:
    n = ranks.shape[0]
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(absdiff, return_counts=True)
    tie_term = float(((tie_counts.astype(np.float64) ** 3) - tie_counts).sum()) / 48.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    z = (w_plus - mean) / math.sqrt(var)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))
