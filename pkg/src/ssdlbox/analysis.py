"""Aggregation and reporting over completed runs.

Pure functions: accuracy aggregation (mean/population variance), Pearson and
Spearman correlation between dissimilarity and accuracy, per-feature density
histograms for plotting, and the combined accuracy/distance table with a
per-group preference rank from the cosine measure.  Rows whose Wilcoxon
p-value exceeds 0.05 are flagged and marked with a trailing '*' in the
plain-text table.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .dissimilarity import DissimilarityReport, Histogram, make_histogram
from .errors import DataError
from .features import FeatureMatrix
from .sandbox import SandboxConfig
from .signed_rank import midranks

P_FLAG_THRESHOLD = 0.05
MEASURE_COLUMNS = ("L1", "L2", "JS", "COS")


@dataclass(frozen=True)
class RunAggregate:
    config: SandboxConfig
    accuracies: tuple[float, ...]
    mean: float
    variance: float


def aggregate(accuracies, config: SandboxConfig) -> RunAggregate:
    """Arithmetic mean and population variance of per-run best accuracies."""
    vals = np.asarray(list(accuracies), dtype=np.float64)
    if vals.size == 0:
        raise DataError("cannot aggregate an empty accuracy list")
    return RunAggregate(
        config=config,
        accuracies=tuple(float(v) for v in vals),
        mean=float(vals.mean()),
        variance=float(vals.var()),
    )


def correlate(pairs, method: str = "pearson") -> float:
    """Correlation over (dissimilarity, accuracy) pairs; spearman is pearson
    on mid-ranks."""
    arr = np.asarray(list(pairs), dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DataError("pairs must be a sequence of (x, y) tuples")
    if arr.shape[0] < 3:
        raise DataError(f"need >= 3 pairs, got {arr.shape[0]}")
    x, y = arr[:, 0], arr[:, 1]
    if method == "spearman":
        x, y = midranks(x), midranks(y)
    elif method != "pearson":
        raise DataError(f"unknown method {method!r}")
    sx, sy = x.std(), y.std()
    if sx == 0.0 or sy == 0.0:
        raise DataError("correlation undefined for a constant series")
    r = float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))
    return max(-1.0, min(1.0, r))


def feature_density_export(
    s_a: FeatureMatrix, s_b: FeatureMatrix, feature_index: int, bins: int
) -> tuple[Histogram, Histogram, list[tuple[float, float, float, float]]]:
    """Paired normalized histograms of one feature over the shared range,
    plus (bin_lo, bin_hi, mass_a, mass_b) rows ready for plotting."""
    if s_a.d != s_b.d:
        raise DataError(f"dimension mismatch: {s_a.d} vs {s_b.d}")
    if not 0 <= feature_index < s_a.d:
        raise DataError(f"feature index {feature_index} out of range [0, {s_a.d})")
    col_a = s_a.data[:, feature_index].astype(np.float64)
    col_b = s_b.data[:, feature_index].astype(np.float64)
    lo = min(col_a.min(), col_b.min())
    hi = max(col_a.max(), col_b.max())
    if lo == hi:
        # Degenerate constant feature: widen to a unit window around it.
        lo, hi = lo - 0.5, hi + 0.5
    hist_a = make_histogram(col_a, bins, (lo, hi))
    hist_b = make_histogram(col_b, bins, (lo, hi))
    rows = [
        (
            float(hist_a.edges[i]),
            float(hist_a.edges[i + 1]),
            float(hist_a.mass[i]),
            float(hist_b.mass[i]),
        )
        for i in range(bins)
    ]
    return hist_a, hist_b, rows


def density_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("bin_lo,bin_hi,mass_a,mass_b\n")
    for lo, hi, ma, mb in rows:
        buf.write(f"{lo!r},{hi!r},{ma!r},{mb!r}\n")
    return buf.getvalue()


def report_matrix(accuracy_cells: list[dict], distance_cells: list[dict]) -> list[dict]:
    """Join accuracy cells with their distance reports into table rows.

    accuracy_cells: dicts with s_iod, s_uood, pct_uood, n_l, mode
    ('supervised' or 'ssdl'), acc_mean, acc_var.  distance_cells: dicts with
    s_iod, s_uood, pct_uood and reports {measure: DissimilarityReport}.
    Every ssdl cell must find its distance cell; supervised baselines carry
    no distance columns.  Within each (s_iod, pct_uood, n_l) group the ssdl
    rows get rank 1..k by ascending COS mean.
    """
    dist_index: dict[tuple, dict] = {}
    for cell in distance_cells:
        key = (cell["s_iod"], cell["s_uood"], cell["pct_uood"])
        dist_index[key] = cell["reports"]

    missing = []
    rows = []
    for cell in accuracy_cells:
        row = {
            "s_iod": cell["s_iod"],
            "s_uood": cell["s_uood"],
            "pct_uood": cell["pct_uood"],
            "n_l": cell["n_l"],
            "mode": cell["mode"],
            "acc_mean": cell["acc_mean"],
            "acc_var": cell["acc_var"],
        }
        if cell["mode"] == "ssdl":
            key = (cell["s_iod"], cell["s_uood"], cell["pct_uood"])
            reports = dist_index.get(key)
            if reports is None:
                missing.append(key)
                continue
            for measure in MEASURE_COLUMNS:
                rep: DissimilarityReport = reports[measure]
                col = measure.lower()
                row[f"{col}_mean"] = rep.mean
                row[f"{col}_std"] = rep.std
                row[f"{col}_p"] = rep.p_value
                row[f"{col}_ns"] = rep.p_value > P_FLAG_THRESHOLD
        rows.append(row)
    if missing:
        raise DataError(
            "missing distance cells: " + ", ".join(repr(k) for k in sorted(missing))
        )

    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        if row["mode"] != "ssdl":
            continue
        groups.setdefault((row["s_iod"], row["pct_uood"], row["n_l"]), []).append(row)
    for members in groups.values():
        members.sort(key=lambda r: (r["cos_mean"], r["s_uood"]))
        for rank, row in enumerate(members, start=1):
            row["cos_rank"] = rank

    rows.sort(
        key=lambda r: (r["s_iod"], r["n_l"], r["mode"], r["pct_uood"], r["s_uood"])
    )
    return rows


_CSV_COLUMNS = (
    "s_iod,s_uood,pct_uood,n_l,mode,acc_mean,acc_var,"
    "l1_mean,l1_std,l1_p,l1_ns,l2_mean,l2_std,l2_p,l2_ns,"
    "js_mean,js_std,js_p,js_ns,cos_mean,cos_std,cos_p,cos_ns,cos_rank"
).split(",")


def report_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(",".join(_CSV_COLUMNS) + "\n")
    for row in rows:
        out = []
        for col in _CSV_COLUMNS:
            val = row.get(col, "")
            if isinstance(val, bool):
                val = int(val)
            if isinstance(val, float):
                val = repr(val)
            out.append(str(val))
        buf.write(",".join(out) + "\n")
    return buf.getvalue()


def report_text(rows: list[dict]) -> str:
    """Aligned table; distance entries with p > 0.05 get a trailing '*'."""

    def fmt_dist(row, measure):
        if f"{measure}_mean" not in row:
            return ""
        mark = "*" if row[f"{measure}_ns"] else ""
        return f"{row[f'{measure}_mean']:.3f}±{row[f'{measure}_std']:.3f}{mark}"

    header = ["s_iod", "s_uood", "pct", "n_l", "mode", "acc", "l1", "l2", "js", "cos", "rank"]
    table = [header]
    for row in rows:
        table.append(
            [
                row["s_iod"],
                str(row["s_uood"]),
                str(row["pct_uood"]),
                str(row["n_l"]),
                row["mode"],
                f"{row['acc_mean']:.3f}±{row['acc_var']:.3f}",
                fmt_dist(row, "l1"),
                fmt_dist(row, "l2"),
                fmt_dist(row, "js"),
                fmt_dist(row, "cos"),
                str(row.get("cos_rank", "")),
            ]
        )
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in table]
    return "\n".join(lines) + "\n"
