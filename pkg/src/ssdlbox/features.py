"""Feature matrices: the on-disk formats, sub-sampling, and standardization.

Binary format ("ddim"): magic bytes ``DDIM``, version u16 = 1, row count n
as u32, column count d as u32 (all little endian), followed by n*d float32
values in row-major order.  Labels, when present, live in a sibling file at
``<path>.labels`` holding exactly n little-endian u32 class ids.

CSV format: no header, one row per line, comma-separated decimals printed
with %.9g (enough digits to round-trip float32 exactly).
"""

from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .rng import Stream

MAGIC = b"DDIM"
VERSION = 1


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """An n x d block of finite float32 features; one row per observation."""

    data: np.ndarray
    name: str = ""

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        if arr.ndim != 2:
            raise DataError(f"feature data must be 2-d, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError("empty dataset")
        bad = np.argwhere(~np.isfinite(arr))
        if bad.size:
            r, c = bad[0]
            raise DataError(f"non-finite value at row {r}, column {c}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class LabeledFeatureSet:
    """Features plus one integer class id per row, each in [0, num_classes)."""

    features: FeatureMatrix
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        lab = np.ascontiguousarray(self.labels, dtype=np.int64)
        if lab.ndim != 1 or lab.shape[0] != self.features.n:
            raise DataError(
                f"labels length {lab.shape} does not match {self.features.n} rows"
            )
        if self.num_classes < 1:
            raise DataError("num_classes must be >= 1")
        if lab.size and (lab.min() < 0 or lab.max() >= self.num_classes):
            raise DataError(
                f"class ids must lie in [0, {self.num_classes}), got range "
                f"[{lab.min()}, {lab.max()}]"
            )
        lab.flags.writeable = False
        object.__setattr__(self, "labels", lab)


@dataclass(frozen=True)
class SubsampleSpec:
    """Sub-sampling protocol: tau rows per draw, `draws` independent draws."""

    tau: int
    draws: int
    seed: int = 0

    def __post_init__(self):
        if self.tau < 1:
            raise DataError("tau must be >= 1")
        if self.draws < 1:
            raise DataError("draws must be >= 1")


def labels_path(path: str) -> str:
    return path + ".labels"


def load_features(path: str, fmt: str = "binary") -> FeatureMatrix:
    if fmt == "binary":
        return _load_binary(path)
    if fmt == "csv":
        return _load_csv(path)
    raise DataError(f"unknown feature format {fmt!r}")


def save_features(matrix: FeatureMatrix, path: str, fmt: str = "binary") -> None:
    if fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(struct.pack("<4sHII", MAGIC, VERSION, matrix.n, matrix.d))
            fh.write(matrix.data.astype("<f4", copy=False).tobytes(order="C"))
    elif fmt == "csv":
        buf = io.StringIO()
        for row in matrix.data:
            buf.write(",".join("%.9g" % v for v in row))
            buf.write("\n")
        with open(path, "w") as fh:
            fh.write(buf.getvalue())
    else:
        raise DataError(f"unknown feature format {fmt!r}")


def _load_binary(path: str) -> FeatureMatrix:
    with open(path, "rb") as fh:
        header = fh.read(14)
        if len(header) < 14:
            raise DataError(f"{path}: truncated header ({len(header)} bytes)")
        magic, version, n, d = struct.unpack("<4sHII", header)
        if magic != MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise DataError(f"{path}: unsupported version {version}")
        if n == 0 or d == 0:
            raise DataError(f"{path}: empty dataset (n={n}, d={d})")
        payload = fh.read()
    expected = 4 * n * d
    if len(payload) != expected:
        raise DataError(
            f"{path}: payload holds {len(payload)} bytes, header implies {expected}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(n, d)
    return FeatureMatrix(data, name=os.path.basename(path))


def _load_csv(path: str) -> FeatureMatrix:
    rows: list[list[float]] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if rows and len(parts) != len(rows[0]):
                raise DataError(
                    f"{path}: row {lineno} has {len(parts)} columns, expected {len(rows[0])}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise DataError(f"{path}: row {lineno}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty dataset")
    return FeatureMatrix(np.asarray(rows, dtype=np.float32), name=os.path.basename(path))


def load_labels(path: str, n: int) -> np.ndarray:
    """Read the u32 labels sidecar belonging to a feature file at `path`."""
    side = labels_path(path)
    with open(side, "rb") as fh:
        raw = fh.read()
    if len(raw) != 4 * n:
        raise DataError(f"{side}: holds {len(raw) // 4} labels, expected {n}")
    return np.frombuffer(raw, dtype="<u4").astype(np.int64)


def save_labels(labels: np.ndarray, path: str) -> None:
    arr = np.ascontiguousarray(labels, dtype="<u4")
    with open(labels_path(path), "wb") as fh:
        fh.write(arr.tobytes(order="C"))


def load_labeled(path: str, num_classes: int, fmt: str = "binary") -> LabeledFeatureSet:
    feats = load_features(path, fmt)
    labels = load_labels(path, feats.n)
    return LabeledFeatureSet(feats, labels, num_classes)


def subsample(matrix: FeatureMatrix, tau: int, stream: Stream) -> FeatureMatrix:
    """tau distinct rows drawn uniformly without replacement, in draw order."""
    if tau > matrix.n:
        raise DataError(f"tau={tau} exceeds row count {matrix.n}")
    idx = stream.sample_without_replacement(matrix.n, tau)
    return FeatureMatrix(matrix.data[idx], name=matrix.name)


def standardize(x: FeatureMatrix | np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Column-wise (x - mean) / std using only the given rows.

    Returns (standardized float64 matrix, mean vector, std vector).  Columns
    with zero variance map to all-zeros and report std 0.
    """
    data = x.data if isinstance(x, FeatureMatrix) else np.asarray(x)
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise DataError("standardize expects a non-empty 2-d matrix")
    mean = arr.mean(axis=0)
    std = arr.std(axis=0)
    return apply_standardization(arr, mean, std), mean, std


def apply_standardization(x: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    safe = np.where(std == 0.0, 1.0, std)
    out = (arr - mean) / safe
    out[:, std == 0.0] = 0.0
    return out
