"""Data-set dissimilarity measures between two feature matrices.

All four measures share one sub-sampling protocol.  For each of `draws`
independent draws c:

* draw a tau-row subsample of S_a and one of S_b and score the dissimilarity
  between them (the inter value),
* draw two disjoint tau-row subsamples of S_a and score those (the intra
  reference; disjointness keeps nearest-neighbour self matches out),
* keep |inter_c - intra_c|.

The report carries the mean and spread of those reference-subtracted values
plus a two-sided Wilcoxon signed-rank p-value over the paired inter/intra
lists.  Minkowski measures (L1, L2) score a draw with the mean
nearest-neighbour distance from the first subsample into the second.
Density measures (JS, COS) treat feature dimensions as independent, build a
normalized histogram per dimension over the min/max range of the union of
the two current subsamples, and sum the per-dimension divergences.

Draw c derives its random stream from (seed, c), so reports are identical
at any level of parallelism, and every draw's index sets are reproducible
via :func:`draw_indices`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .features import FeatureMatrix, SubsampleSpec
from .rng import Stream
from .signed_rank import wilcoxon_signed_rank

MEASURES = ("L1", "L2", "JS", "COS")
DEFAULT_BINS = 50

# Cap on elements of one broadcast |a - b| block; larger inputs are chunked
# row-wise, which leaves every per-row result unchanged.
_BLOCK_ELEMENTS = 2**25


@dataclass(frozen=True, eq=False)
class Histogram:
    """Normalized histogram: `edges` (bins+1 ascending), `mass` summing to 1
    (all-zero when built from no values)."""

    edges: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.float64)
        mass = np.asarray(self.mass, dtype=np.float64)
        if edges.ndim != 1 or mass.ndim != 1 or edges.shape[0] != mass.shape[0] + 1:
            raise DataError("histogram needs bins+1 edges for bins masses")
        if np.any(np.diff(edges) <= 0):
            raise DataError("histogram edges must ascend")
        if np.any(mass < 0):
            raise DataError("histogram mass must be non-negative")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "mass", mass)

    @property
    def bins(self) -> int:
        return self.mass.shape[0]


@dataclass(frozen=True)
class DissimilarityReport:
    measure: str
    mean: float
    std: float
    per_sample: tuple[float, ...]
    p_value: float
    tau: int
    draws: int

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "mean": self.mean,
            "std": self.std,
            "p_value": self.p_value,
            "tau": self.tau,
            "draws": self.draws,
            "per_sample": list(self.per_sample),
        }


def nn_minkowski(h_a: FeatureMatrix, h_b: FeatureMatrix, p: int) -> np.ndarray:
    """Distance from each row of h_a to its nearest row of h_b under l_p."""
    if p not in (1, 2):
        raise DataError(f"p must be 1 or 2, got {p}")
    if h_a.d != h_b.d:
        raise DataError(f"dimension mismatch: {h_a.d} vs {h_b.d}")
    return _nn_minkowski_arrays(
        h_a.data.astype(np.float64), h_b.data.astype(np.float64), p
    )


def _nn_minkowski_arrays(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    # Accumulate one dimension at a time: strict left-to-right summation over
    # coordinates, so results match a scalar per-pair loop bit for bit.
    out = np.empty(a.shape[0], dtype=np.float64)
    step = max(1, _BLOCK_ELEMENTS // max(1, b.shape[0] * b.shape[1]))
    for start in range(0, a.shape[0], step):
        chunk = a[start : start + step]
        acc = np.zeros((chunk.shape[0], b.shape[0]), dtype=np.float64)
        for k in range(a.shape[1]):
            diff = chunk[:, k, None] - b[None, :, k]
            if p == 1:
                acc += np.abs(diff)
            else:
                acc += diff * diff
        dist = acc if p == 1 else np.sqrt(acc)
        out[start : start + step] = dist.min(axis=1)
    return out


def make_histogram(values, bins: int, value_range: tuple[float, float]) -> Histogram:
    """Normalized histogram over [lo, hi); out-of-range values land in the
    nearest edge bin."""
    lo, hi = float(value_range[0]), float(value_range[1])
    if bins < 1:
        raise DataError("bins must be >= 1")
    if not lo < hi:
        raise DataError(f"need lo < hi, got ({lo}, {hi})")
    values = np.asarray(values, dtype=np.float64).ravel()
    edges = lo + (hi - lo) * np.arange(bins + 1) / bins
    edges[-1] = hi
    mass = np.zeros(bins, dtype=np.float64)
    if values.size:
        idx = np.clip(np.floor((values - lo) * (bins / (hi - lo))), 0, bins - 1)
        np.add.at(mass, idx.astype(np.int64), 1.0)
        mass /= values.size
    return Histogram(edges, mass)


def _check_same_binning(p: Histogram, q: Histogram) -> None:
    if p.bins != q.bins or not np.array_equal(p.edges, q.edges):
        raise DataError("histograms must share bins and edges")


def js_divergence(p: Histogram, q: Histogram) -> float:
    """Jensen-Shannon divergence in nats (0 <= value <= ln 2)."""
    _check_same_binning(p, q)
    return _js_mass(p.mass, q.mass)


def _js_mass(pm: np.ndarray, qm: np.ndarray) -> float:
    m = 0.5 * (pm + qm)
    out = 0.0
    for vec in (pm, qm):
        nz = vec > 0.0
        out += 0.5 * float((vec[nz] * np.log(vec[nz] / m[nz])).sum())
    return out


def cosine_distance(p: Histogram, q: Histogram) -> float:
    _check_same_binning(p, q)
    return _cosine_mass(p.mass, q.mass)


def _cosine_mass(pm: np.ndarray, qm: np.ndarray) -> float:
    np_norm = math.sqrt(float((pm * pm).sum()))
    nq_norm = math.sqrt(float((qm * qm).sum()))
    if np_norm == 0.0 or nq_norm == 0.0:
        raise DataError("cosine distance undefined for an all-zero histogram")
    return max(0.0, 1.0 - float((pm * qm).sum()) / (np_norm * nq_norm))


def draw_indices(
    n_a: int, n_b: int, spec: SubsampleSpec, draw: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Row index sets for one draw: (inter_a, inter_b, intra_1, intra_2)."""
    s = Stream(spec.seed).child("draw", draw)
    inter_a = s.sample_without_replacement(n_a, spec.tau)
    inter_b = s.sample_without_replacement(n_b, spec.tau)
    both = s.sample_without_replacement(n_a, 2 * spec.tau)
    return inter_a, inter_b, both[: spec.tau], both[spec.tau :]


def _check_protocol(s_a: FeatureMatrix, s_b: FeatureMatrix, spec: SubsampleSpec) -> None:
    if s_a.d != s_b.d:
        raise DataError(f"dimension mismatch: {s_a.d} vs {s_b.d}")
    if spec.tau > s_b.n:
        raise DataError(f"tau={spec.tau} exceeds candidate row count {s_b.n}")
    if 2 * spec.tau > s_a.n:
        raise DataError(
            f"intra draw needs 2*tau={2 * spec.tau} rows, reference set has {s_a.n}"
        )


def _protocol(
    s_a: FeatureMatrix,
    s_b: FeatureMatrix,
    spec: SubsampleSpec,
    measure: str,
    score,
) -> DissimilarityReport:
    _check_protocol(s_a, s_b, spec)
    a = s_a.data.astype(np.float64)
    b = s_b.data.astype(np.float64)
    inter = np.empty(spec.draws)
    intra = np.empty(spec.draws)
    for c in range(spec.draws):
        ia, ib, ja, jb = draw_indices(s_a.n, s_b.n, spec, c)
        inter[c] = score(a[ia], b[ib])
        intra[c] = score(a[ja], a[jb])
    per_sample = np.abs(inter - intra)
    p_value = wilcoxon_signed_rank(inter, intra)
    return DissimilarityReport(
        measure=measure,
        mean=float(per_sample.mean()),
        std=float(per_sample.std()),
        per_sample=tuple(float(v) for v in per_sample),
        p_value=float(p_value),
        tau=spec.tau,
        draws=spec.draws,
    )


def minkowski_dissimilarity(
    s_a: FeatureMatrix, s_b: FeatureMatrix, spec: SubsampleSpec, p: int
) -> DissimilarityReport:
    """Reference-subtracted mean nearest-neighbour l_p distance report."""
    if p not in (1, 2):
        raise DataError(f"p must be 1 or 2, got {p}")

    def score(a: np.ndarray, b: np.ndarray) -> float:
        return float(_nn_minkowski_arrays(a, b, p).mean())

    return _protocol(s_a, s_b, spec, f"L{p}", score)


def _density_score(a: np.ndarray, b: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-dimension histogram masses over the union range of two subsamples.

    Returns (mass_a, mass_b, active) with shape (d, bins); inactive
    dimensions (zero union range) hold identical point-mass histograms.
    """
    lo = np.minimum(a.min(axis=0), b.min(axis=0))
    hi = np.maximum(a.max(axis=0), b.max(axis=0))
    active = hi > lo
    width = np.where(active, hi - lo, 1.0)
    d = a.shape[1]
    cols = np.broadcast_to(np.arange(d), a.shape)
    mass = []
    for block in (a, b):
        idx = np.clip(np.floor((block - lo) * (bins / width)), 0, bins - 1).astype(np.int64)
        counts = np.zeros((d, bins), dtype=np.float64)
        np.add.at(counts, (cols, idx), 1.0)
        mass.append(counts / block.shape[0])
    return mass[0], mass[1], active


def density_dissimilarity(
    s_a: FeatureMatrix,
    s_b: FeatureMatrix,
    spec: SubsampleSpec,
    kind: str,
    bins: int = DEFAULT_BINS,
) -> DissimilarityReport:
    """Reference-subtracted sum of per-dimension histogram divergences."""
    if kind not in ("JS", "COS"):
        raise DataError(f"kind must be JS or COS, got {kind!r}")
    if bins < 1:
        raise DataError("bins must be >= 1")

    def score(a: np.ndarray, b: np.ndarray) -> float:
        pa, pb, _ = _density_score(a, b, bins)
        total = 0.0
        for r in range(a.shape[1]):
            if kind == "JS":
                total += _js_mass(pa[r], pb[r])
            else:
                total += _cosine_mass(pa[r], pb[r])
        return total

    return _protocol(s_a, s_b, spec, kind, score)


def dissimilarity(
    s_a: FeatureMatrix,
    s_b: FeatureMatrix,
    spec: SubsampleSpec,
    measure: str,
    bins: int = DEFAULT_BINS,
) -> DissimilarityReport:
    measure = measure.upper()
    if measure == "L1":
        return minkowski_dissimilarity(s_a, s_b, spec, 1)
    if measure == "L2":
        return minkowski_dissimilarity(s_a, s_b, spec, 2)
    if measure in ("JS", "COS"):
        return density_dissimilarity(s_a, s_b, spec, measure, bins)
    raise DataError(f"unknown measure {measure!r}, expected one of {MEASURES}")


def rank_candidates(
    s_l: FeatureMatrix,
    candidates: list[tuple[str, FeatureMatrix]],
    spec: SubsampleSpec,
    measure: str,
    bins: int = DEFAULT_BINS,
) -> list[tuple[str, DissimilarityReport]]:
    """Candidates ordered by ascending mean dissimilarity to the reference
    set (rank 1 = preferred unlabelled source); ties break by name."""
    if not candidates:
        raise DataError("no candidates to rank")
    for name, cand in candidates:
        if cand.d != s_l.d:
            raise DataError(f"candidate {name!r}: dimension {cand.d} != {s_l.d}")
    scored = [
        (name, dissimilarity(s_l, cand, spec, measure, bins)) for name, cand in candidates
    ]
    scored.sort(key=lambda item: (item[1].mean, item[0]))
    return scored
