"""Non-IID experiment cells: class splits, label budgets, contamination mixes.

A cell is one configuration of the stress grid; `runs` independent runs are
rebuilt from it, each deriving its random stream from (seed, run_index) so a
run can be reconstructed bit for bit in isolation.  Standardization
statistics are computed only from the rows drawn for the run, never from the
source datasets.  All three parts (labelled, unlabelled, test) are
standardized with the labelled-subset statistics so that a displaced
contamination source stays displaced in the model's input space; the
unlabelled pool's own statistics are measured and reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .features import (
    FeatureMatrix,
    LabeledFeatureSet,
    apply_standardization,
    standardize,
)
from .rng import Stream

OOD_TYPES = ("OH", "Sim", "Dif")
PCT_CHOICES = (0, 50, 100)

GAUSSIAN_NOISE_VARIANCE = 10.0
# Mean-0 pixels would clip half their mass at 0 on a [0, 255] scale, so noise
# images are centred at mid-gray before clipping.
GAUSSIAN_NOISE_OFFSET = 128.0
BLOB_CENTER_SCALE = 3.0


@dataclass(frozen=True)
class SandboxConfig:
    """One cell of the stress grid."""

    s_iod: str
    t_ood: str
    s_uood: str
    pct_uood: int
    n_l: int
    n_u: int = 3000
    num_classes: int = 5
    seed: int = 0
    runs: int = 10
    n_test: int = 1000

    def __post_init__(self):
        if self.t_ood not in OOD_TYPES:
            raise DataError(f"t_ood must be one of {OOD_TYPES}, got {self.t_ood!r}")
        if self.pct_uood not in PCT_CHOICES:
            raise DataError(f"pct_uood must be one of {PCT_CHOICES}, got {self.pct_uood}")
        for name in ("n_l", "n_u", "num_classes", "runs", "n_test"):
            if getattr(self, name) < 1:
                raise DataError(f"{name} must be >= 1")


def check_reference_grid(config: SandboxConfig) -> None:
    """Enforce the canonical stress-grid shape: three label budgets, five
    classes, ten runs."""
    if config.n_l not in (60, 100, 150):
        raise DataError(f"reference-grid n_l must be 60, 100 or 150, got {config.n_l}")
    if config.num_classes != 5:
        raise DataError(f"reference-grid num_classes must be 5, got {config.num_classes}")
    if config.runs != 10:
        raise DataError(f"reference-grid runs must be 10, got {config.runs}")


@dataclass(frozen=True, eq=False)
class RunData:
    """Materialized data of one run, standardized and ready to train on.

    stats_l are the labelled-subset statistics applied to every part;
    stats_u are the unlabelled pool's own measured statistics, kept for
    mismatch diagnostics.  The *_idx fields record which source rows each
    part came from so partition contracts stay checkable.
    """

    labelled: LabeledFeatureSet
    unlabelled: FeatureMatrix
    test: LabeledFeatureSet
    stats_l: tuple[np.ndarray, np.ndarray]
    stats_u: tuple[np.ndarray, np.ndarray]
    labelled_idx: np.ndarray
    unlabelled_iod_idx: np.ndarray
    unlabelled_ood_idx: np.ndarray
    test_idx: np.ndarray


def ood_row_count(n_u: int, pct_uood: int) -> int:
    """Rows of the unlabelled pool replaced by contamination (half rounds up)."""
    return (n_u * pct_uood + 50) // 100


def split_other_half(classes, seed: int) -> tuple[list, list]:
    """Seeded split of an even class list into disjoint IOD/OOD halves."""
    classes = list(classes)
    if len(classes) < 2 or len(classes) % 2 != 0:
        raise DataError(f"need an even class count >= 2, got {len(classes)}")
    perm = Stream(seed).child("class-split").permutation(len(classes))
    half = len(classes) // 2
    iod = [classes[i] for i in perm[:half]]
    ood = [classes[i] for i in perm[half:]]
    return iod, ood


def build_run(
    config: SandboxConfig,
    run_index: int,
    iod: LabeledFeatureSet,
    ood: FeatureMatrix | None,
) -> RunData:
    """Draw one run: class-balanced labelled set, mixed unlabelled pool,
    IOD-only test set, pairwise-disjoint IOD source rows."""
    if iod.num_classes != config.num_classes:
        raise DataError(
            f"IOD source declares {iod.num_classes} classes, config wants {config.num_classes}"
        )
    n_ood = ood_row_count(config.n_u, config.pct_uood)
    n_iod_u = config.n_u - n_ood
    if n_ood > 0:
        if ood is None:
            raise DataError("pct_uood > 0 requires an OOD source")
        if ood.d != iod.features.d:
            raise DataError(f"OOD dimension {ood.d} != IOD dimension {iod.features.d}")
        if n_ood > ood.n:
            raise DataError(f"need {n_ood} OOD rows, source has {ood.n}")

    rng = Stream(config.seed).child("run", run_index)
    k = config.num_classes

    quota = np.full(k, config.n_l // k, dtype=np.int64)
    extra_order = rng.permutation(k)
    quota[extra_order[: config.n_l % k]] += 1

    labelled_parts = []
    for cls in range(k):
        pool = np.flatnonzero(iod.labels == cls)
        if quota[cls] > pool.size:
            raise DataError(
                f"class {cls}: need {quota[cls]} labelled rows, source has {pool.size}"
            )
        pick = rng.sample_without_replacement(pool.size, int(quota[cls]))
        labelled_parts.append(pool[pick])
    labelled_idx = np.concatenate(labelled_parts)

    taken = np.zeros(iod.features.n, dtype=bool)
    taken[labelled_idx] = True
    remaining = np.flatnonzero(~taken)
    if n_iod_u > remaining.size:
        raise DataError(
            f"need {n_iod_u} unlabelled IOD rows, only {remaining.size} left after labelling"
        )
    pick = rng.sample_without_replacement(remaining.size, n_iod_u)
    unlabelled_iod_idx = remaining[pick]
    taken[unlabelled_iod_idx] = True

    remaining = np.flatnonzero(~taken)
    if config.n_test > remaining.size:
        raise DataError(
            f"need {config.n_test} test rows, only {remaining.size} left after "
            "labelled and unlabelled draws"
        )
    pick = rng.sample_without_replacement(remaining.size, config.n_test)
    test_idx = remaining[pick]

    if n_ood > 0:
        unlabelled_ood_idx = rng.sample_without_replacement(ood.n, n_ood)
        raw_unlabelled = np.vstack(
            [iod.features.data[unlabelled_iod_idx], ood.data[unlabelled_ood_idx]]
        )
    else:
        unlabelled_ood_idx = np.empty(0, dtype=np.int64)
        raw_unlabelled = iod.features.data[unlabelled_iod_idx]
    shuffle = rng.permutation(config.n_u)
    raw_unlabelled = raw_unlabelled[shuffle]

    raw_labelled = iod.features.data[labelled_idx]
    raw_test = iod.features.data[test_idx]

    std_labelled, mean_l, std_l = standardize(raw_labelled)
    _, mean_u, std_u = standardize(raw_unlabelled)
    std_unlabelled = apply_standardization(raw_unlabelled, mean_l, std_l)
    std_test = apply_standardization(raw_test, mean_l, std_l)

    labelled = LabeledFeatureSet(
        FeatureMatrix(std_labelled, name=f"{config.s_iod}/labelled"),
        iod.labels[labelled_idx],
        config.num_classes,
    )
    test = LabeledFeatureSet(
        FeatureMatrix(std_test, name=f"{config.s_iod}/test"),
        iod.labels[test_idx],
        config.num_classes,
    )
    unlabelled = FeatureMatrix(std_unlabelled, name=f"{config.s_uood}/unlabelled")
    return RunData(
        labelled=labelled,
        unlabelled=unlabelled,
        test=test,
        stats_l=(mean_l, std_l),
        stats_u=(mean_u, std_u),
        labelled_idx=labelled_idx,
        unlabelled_iod_idx=unlabelled_iod_idx,
        unlabelled_ood_idx=unlabelled_ood_idx,
        test_idx=test_idx,
    )


def gen_gaussian_noise(n: int, shape: tuple[int, ...], seed: int) -> np.ndarray:
    """Gaussian-noise images: N(0, var 10) pixels shifted to mid-gray and
    clipped to [0, 255]."""
    if n < 1:
        raise DataError("n must be >= 1")
    count = n * int(np.prod(shape))
    z = Stream(seed).child("gaussian-noise").normals(count)
    vals = GAUSSIAN_NOISE_OFFSET + math.sqrt(GAUSSIAN_NOISE_VARIANCE) * z
    return np.clip(vals, 0.0, 255.0).astype(np.float32).reshape((n, *shape))


def gen_salt_pepper(n: int, shape: tuple[int, ...], seed: int) -> np.ndarray:
    """Salt-and-pepper images: each pixel 0 or 255 with probability 1/2."""
    if n < 1:
        raise DataError("n must be >= 1")
    count = n * int(np.prod(shape))
    u = Stream(seed).child("salt-pepper").uniforms(count)
    vals = np.where(u < 0.5, 255.0, 0.0)
    return vals.astype(np.float32).reshape((n, *shape))


def gen_synthetic_clusters(
    num_classes: int,
    per_class: int,
    dim: int,
    spread: float,
    shift: float,
    seed: int,
    name: str = "blobs",
    modes_per_class: int = 1,
) -> LabeledFeatureSet:
    """Gaussian blobs at seeded centers.

    Centers are drawn once from N(0, BLOB_CENTER_SCALE^2) per coordinate;
    `shift` displaces every center by the same amount in every coordinate,
    so two calls sharing a seed produce the same layout at a controllable
    offset from one another.  With ``modes_per_class > 1`` each class is a
    union of that many blobs (points split evenly over them, remainder to
    the earlier modes), which makes a tiny labelled draw under-determine the
    class regions while the unlabelled pool still reveals them.
    """
    if num_classes < 2:
        raise DataError("num_classes must be >= 2")
    if per_class < 1 or dim < 1 or modes_per_class < 1:
        raise DataError("per_class, dim and modes_per_class must be >= 1")
    root = Stream(seed)
    m = modes_per_class
    centers = BLOB_CENTER_SCALE * root.child("centers").normals(num_classes * m * dim)
    centers = centers.reshape(num_classes * m, dim) + shift
    rows = np.empty((num_classes * per_class, dim), dtype=np.float64)
    labels = np.repeat(np.arange(num_classes), per_class)
    for cls in range(num_classes):
        sizes = np.full(m, per_class // m, dtype=np.int64)
        sizes[: per_class % m] += 1
        offset = cls * per_class
        for mode in range(m):
            noise = (
                root.child("points", cls * m + mode)
                .normals(int(sizes[mode]) * dim)
                .reshape(int(sizes[mode]), dim)
            )
            rows[offset : offset + sizes[mode]] = centers[cls * m + mode] + spread * noise
            offset += int(sizes[mode])
    return LabeledFeatureSet(FeatureMatrix(rows, name=name), labels, num_classes)
