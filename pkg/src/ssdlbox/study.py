"""Grid expansion and execution of sandbox cells.

A grid file is flat ``key = value`` text where any value may be a
comma-separated list; the grid is the Cartesian product over listed keys.
Cells whose contamination is 0 collapse to a single row per n_l, and each
n_l additionally gets a fully-supervised twin (gamma = 0) so every study
carries its own baseline rows.

Sources are either synthetic ("blobs" for the in-distribution task,
"shift:X" for a displaced copy acting as contamination) or paths to feature
files.  Dissimilarity reports are computed once per (iod, ood, pct)
combination on raw, unstandardized features between the in-distribution
pool and a seeded contamination mixture.

Cells are independent; `jobs > 1` fans them out over processes without
changing any output byte.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .analysis import aggregate, correlate, report_csv, report_matrix
from .dissimilarity import MEASURES, dissimilarity
from .errors import DataError
from .features import (
    FeatureMatrix,
    LabeledFeatureSet,
    SubsampleSpec,
    load_features,
    load_labeled,
)
from .mixmatch import MixMatchConfig, train
from .rng import Stream
from .sandbox import SandboxConfig, build_run, gen_synthetic_clusters

NO_OOD = "-"


@dataclass(frozen=True)
class CellConfig:
    """One grid cell: sandbox identity plus toy-scale training and distance
    protocol knobs (defaults sized for a desk run, not the published grid)."""

    iod: str = "blobs"
    ood: str = NO_OOD
    n_l: int = 60
    pct_uood: int = 0
    mode: str = "ssdl"
    seed: int = 0
    runs: int = 10
    n_u: int = 960
    n_test: int = 400
    num_classes: int = 5
    dim: int = 16
    spread: float = 3.2
    pool_per_class: int = 600
    ood_pool: int = 1500
    epochs: int = 70
    batch_size: int = 16
    learning_rate: float = 0.01
    weight_decay: float = 1e-4
    k: int = 3
    temperature: float = 0.5
    alpha: float = 0.75
    gamma: float = 25.0
    rho: float = 120.0
    sigma_aug: float = 0.5
    hidden: int = 64
    tau: int = 40
    draws: int = 10
    bins: int = 20

    def __post_init__(self):
        if self.mode not in ("ssdl", "supervised"):
            raise DataError(f"mode must be ssdl or supervised, got {self.mode!r}")
        if self.pct_uood > 0 and self.ood == NO_OOD:
            raise DataError("contaminated cells need an ood source")


_INT_FIELDS = {
    f.name for f in fields(CellConfig) if f.type in ("int",)
}
_FLOAT_FIELDS = {
    f.name for f in fields(CellConfig) if f.type in ("float",)
}


def parse_grid_text(text: str) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"grid line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        tokens = [tok.strip() for tok in value.split(",") if tok.strip()]
        if not tokens:
            raise DataError(f"grid line {lineno}: no values for {key!r}")
        out[key] = tokens
    return out


def _coerce(key: str, token: str):
    if key in _INT_FIELDS:
        return int(token)
    if key in _FLOAT_FIELDS:
        return float(token)
    return token


def expand_grid(raw: dict[str, list[str]], include_baselines: bool = True) -> list[CellConfig]:
    """Cartesian expansion into ssdl cells plus per-n_l supervised twins."""
    known = {f.name for f in fields(CellConfig)}
    unknown = set(raw) - known
    if unknown:
        raise DataError(f"unknown grid keys: {sorted(unknown)}")

    combos: list[dict] = [{}]
    for key, tokens in raw.items():
        combos = [
            {**combo, key: _coerce(key, tok)} for combo in combos for tok in tokens
        ]

    cells: dict[CellConfig, None] = {}
    for combo in combos:
        combo.pop("mode", None)
        cell = CellConfig(**combo, mode="ssdl")
        if cell.pct_uood == 0:
            cell = replace(cell, ood=NO_OOD)
        cells[cell] = None
    if include_baselines:
        for cell in list(cells):
            base = replace(cell, mode="supervised", pct_uood=0, ood=NO_OOD)
            cells[base] = None
    ordered = sorted(cells, key=cell_key)
    return ordered


def cell_key(cell: CellConfig) -> str:
    ood = cell.ood.replace(os.sep, "_").replace(":", "")
    return (
        f"{cell.iod.replace(os.sep, '_')}_{cell.mode}_nl{cell.n_l}"
        f"_pct{cell.pct_uood}_ood{ood}_seed{cell.seed}"
    )


def _shift_of(token: str) -> float | None:
    if token.startswith("shift:"):
        return float(token.split(":", 1)[1])
    return None


def build_cell_sources(cell: CellConfig) -> tuple[LabeledFeatureSet, FeatureMatrix | None]:
    if cell.iod == "blobs":
        iod = gen_synthetic_clusters(
            num_classes=cell.num_classes,
            per_class=cell.pool_per_class,
            dim=cell.dim,
            spread=cell.spread,
            shift=0.0,
            seed=Stream(cell.seed).child("iod-source").key,
            name="blobs",
        )
    else:
        iod = load_labeled(cell.iod, cell.num_classes)

    if cell.pct_uood == 0 or cell.ood == NO_OOD:
        return iod, None

    shift = _shift_of(cell.ood)
    if shift is not None:
        # Same seed as the in-distribution source: the contamination is the
        # same blob layout displaced by `shift`, so its off-task severity is
        # controlled by the shift alone.
        per_class = max(1, cell.ood_pool // cell.num_classes)
        ood = gen_synthetic_clusters(
            num_classes=cell.num_classes,
            per_class=per_class,
            dim=cell.dim,
            spread=cell.spread,
            shift=shift,
            seed=Stream(cell.seed).child("iod-source").key,
            name=cell.ood,
        ).features
    else:
        ood = load_features(cell.ood)
    return iod, ood


def sandbox_config(cell: CellConfig) -> SandboxConfig:
    return SandboxConfig(
        s_iod=cell.iod,
        t_ood="Dif",
        s_uood=cell.ood,
        pct_uood=cell.pct_uood if cell.mode == "ssdl" else 0,
        n_l=cell.n_l,
        n_u=cell.n_u,
        num_classes=cell.num_classes,
        seed=cell.seed,
        runs=cell.runs,
        n_test=cell.n_test,
    )


def mixmatch_config(cell: CellConfig) -> MixMatchConfig:
    return MixMatchConfig(
        k=cell.k,
        temperature=cell.temperature,
        alpha=cell.alpha,
        gamma=0.0 if cell.mode == "supervised" else cell.gamma,
        rho=cell.rho,
        epochs=cell.epochs,
        batch_size=cell.batch_size,
        learning_rate=cell.learning_rate,
        weight_decay=cell.weight_decay,
        sigma_aug=cell.sigma_aug,
        hidden=cell.hidden,
    )


def run_cell(cell: CellConfig) -> dict:
    """Train every run of one cell and return a JSON-ready payload."""
    iod, ood = build_cell_sources(cell)
    scfg = sandbox_config(cell)
    mcfg = mixmatch_config(cell)
    curves = []
    best = []
    for r in range(cell.runs):
        run = build_run(scfg, r, iod, ood)
        result = train(run, mcfg, seed=Stream(cell.seed).child("train", r).key)
        curves.append(result.accuracy_per_epoch)
        best.append(result.best_accuracy)
    agg = aggregate(best, scfg)
    return {
        "config": asdict(cell),
        "accuracies": list(agg.accuracies),
        "acc_mean": agg.mean,
        "acc_var": agg.variance,
        "curves": curves,
    }


def distance_cell(cell: CellConfig) -> dict:
    """All four dissimilarity reports between the raw in-distribution pool
    and a seeded raw contamination mixture for this (iod, ood, pct)."""
    iod, ood = build_cell_sources(cell)
    pool = iod.features
    rng = Stream(cell.seed).child("dist", cell.ood, cell.pct_uood)
    n_mix = cell.n_u
    n_ood = (n_mix * cell.pct_uood + 50) // 100
    parts = []
    if n_mix - n_ood > 0:
        idx = rng.sample_without_replacement(pool.n, n_mix - n_ood)
        parts.append(pool.data[idx])
    if n_ood > 0:
        idx = rng.sample_without_replacement(ood.n, n_ood)
        parts.append(ood.data[idx])
    mixture = FeatureMatrix(np.vstack(parts)[rng.permutation(n_mix)], name="mixture")
    spec = SubsampleSpec(tau=cell.tau, draws=cell.draws, seed=Stream(cell.seed).child("dist-spec").key)
    reports = {m: dissimilarity(pool, mixture, spec, m, cell.bins) for m in MEASURES}
    return {
        "s_iod": cell.iod,
        "s_uood": cell.ood,
        "pct_uood": cell.pct_uood,
        "reports": reports,
    }


@dataclass
class StudyResult:
    cells: list[CellConfig]
    payloads: dict[str, dict]
    distances: list[dict]
    rows: list[dict]
    correlations: dict


def run_grid(cells: list[CellConfig], jobs: int = 1) -> StudyResult:
    ordered = sorted(cells, key=cell_key)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            payload_list = list(pool.map(run_cell, ordered))
    else:
        payload_list = [run_cell(cell) for cell in ordered]
    payloads = {cell_key(cell): payload for cell, payload in zip(ordered, payload_list)}

    accuracy_cells = []
    for cell, payload in zip(ordered, payload_list):
        accuracy_cells.append(
            {
                "s_iod": cell.iod,
                "s_uood": cell.ood,
                "pct_uood": cell.pct_uood if cell.mode == "ssdl" else 0,
                "n_l": cell.n_l,
                "mode": cell.mode,
                "acc_mean": payload["acc_mean"],
                "acc_var": payload["acc_var"],
            }
        )

    dist_combos: dict[tuple, CellConfig] = {}
    for cell in ordered:
        if cell.mode != "ssdl":
            continue
        combo = (cell.iod, cell.ood, cell.pct_uood)
        dist_combos.setdefault(combo, cell)
    distance_cells = [distance_cell(cell) for _, cell in sorted(dist_combos.items())]

    rows = report_matrix(accuracy_cells, distance_cells)
    correlations = study_correlations(rows)
    return StudyResult(
        cells=ordered,
        payloads=payloads,
        distances=distance_cells,
        rows=rows,
        correlations=correlations,
    )


def study_correlations(rows: list[dict]) -> dict:
    """Pearson and Spearman between each measure's mean and accuracy over
    the contaminated ssdl rows, pooled and per n_l."""
    contaminated = [r for r in rows if r["mode"] == "ssdl" and r["pct_uood"] > 0]
    out: dict = {"cells": len(contaminated), "pooled": {}, "per_n_l": {}}
    if len(contaminated) < 3:
        return out
    for measure in ("l1", "l2", "js", "cos"):
        pairs = [(r[f"{measure}_mean"], r["acc_mean"]) for r in contaminated]
        out["pooled"][measure] = {
            "pearson": correlate(pairs, "pearson"),
            "spearman": correlate(pairs, "spearman"),
        }
    for n_l in sorted({r["n_l"] for r in contaminated}):
        subset = [r for r in contaminated if r["n_l"] == n_l]
        if len(subset) < 3:
            continue
        entry = {}
        for measure in ("l1", "l2", "js", "cos"):
            pairs = [(r[f"{measure}_mean"], r["acc_mean"]) for r in subset]
            entry[measure] = {
                "pearson": correlate(pairs, "pearson"),
                "spearman": correlate(pairs, "spearman"),
            }
        out["per_n_l"][str(n_l)] = entry
    return out


def write_study(outdir: str, result: StudyResult) -> None:
    os.makedirs(outdir, exist_ok=True)
    for key in sorted(result.payloads):
        with open(os.path.join(outdir, f"{key}.json"), "w") as fh:
            json.dump(result.payloads[key], fh, indent=2, sort_keys=True)
            fh.write("\n")
    dist_payload = [
        {
            "s_iod": cell["s_iod"],
            "s_uood": cell["s_uood"],
            "pct_uood": cell["pct_uood"],
            "reports": {m: rep.to_dict() for m, rep in cell["reports"].items()},
        }
        for cell in result.distances
    ]
    with open(os.path.join(outdir, "distances.json"), "w") as fh:
        json.dump(dist_payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(outdir, "report_matrix.csv"), "w") as fh:
        fh.write(report_csv(result.rows))
    with open(os.path.join(outdir, "correlations.json"), "w") as fh:
        json.dump(result.correlations, fh, indent=2, sort_keys=True)
        fh.write("\n")


DEFAULT_SHIFTS = (1.5, 3.0, 5.0)


def default_synthetic_grid(seed: int = 0) -> dict[str, list[str]]:
    """The canonical desk-scale stress grid: 5-class blobs, three label
    budgets, three contamination levels, three displacement magnitudes."""
    return {
        "iod": ["blobs"],
        "ood": [f"shift:{s}" for s in DEFAULT_SHIFTS],
        "n_l": ["60", "100", "150"],
        "pct_uood": ["0", "50", "100"],
        "seed": [str(seed)],
    }


def synthetic_study(seed: int = 0, jobs: int = 1, overrides: dict | None = None) -> StudyResult:
    raw = default_synthetic_grid(seed)
    if overrides:
        raw.update({k: [str(v)] for k, v in overrides.items()})
    return run_grid(expand_grid(raw), jobs=jobs)
