"""Command-line entry point.

Every subcommand prints machine-readable JSON by default (pass
``--format table`` for aligned text), always echoing the fully-resolved
configuration under the ``config`` key so identical invocations produce
byte-identical output.  Any flag can also be supplied through an
environment variable named ``SSDLBOX_<FLAG>`` (flag upper-cased, dashes as
underscores); explicit command-line flags win over the environment.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields

from . import study as study_mod
from .analysis import density_csv, feature_density_export, report_csv, report_text
from .dissimilarity import DEFAULT_BINS, dissimilarity, rank_candidates
from .errors import DataError
from .features import (
    FeatureMatrix,
    SubsampleSpec,
    load_features,
    save_features,
    save_labels,
    standardize,
)
from .sandbox import gen_gaussian_noise, gen_salt_pepper, gen_synthetic_clusters

ENV_PREFIX = "SSDLBOX_"

USAGE_EXIT = 1
DATA_EXIT = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument(
        "--format", choices=("json", "table"), default="json", help="output format"
    )


def build_parser() -> _Parser:
    parser = _Parser(
        prog="ssdlbox",
        description="Dataset dissimilarity measures and a non-IID SSDL sandbox.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_text):
        p = sub.add_parser(
            name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter
        )
        return p

    p = command("dist", "dissimilarity report between two feature files")
    p.add_argument("--a", required=True, help="reference feature file (labelled role)")
    p.add_argument("--b", required=True, help="candidate feature file")
    p.add_argument("--measure", choices=("l1", "l2", "js", "cos"), default="cos")
    p.add_argument("--tau", type=int, default=100, help="subsample size per draw")
    p.add_argument("--c", dest="draws", type=int, default=20, help="number of draws")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS, help="histogram bins")
    p.add_argument("--fmt", choices=("binary", "csv"), default="binary", help="input file format")
    p.add_argument(
        "--standardize",
        action="store_true",
        help="standardize each set on its own statistics before measuring",
    )
    _add_common(p)

    p = command("rank", "order candidate feature files by dissimilarity to a reference")
    p.add_argument("--labelled", required=True, help="reference feature file")
    p.add_argument("--candidates", required=True, help="comma-separated candidate files")
    p.add_argument("--measure", choices=("l1", "l2", "js", "cos"), default="cos")
    p.add_argument("--tau", type=int, default=100)
    p.add_argument("--c", dest="draws", type=int, default=20)
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--fmt", choices=("binary", "csv"), default="binary")
    _add_common(p)

    p = command("sandbox", "run a grid of sandbox cells and write reports")
    p.add_argument("--grid", required=True, help="grid config file (key = v1,v2,... lines)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel cell workers")
    _add_common(p)

    p = command("train", "train one sandbox cell and emit per-run curves")
    for f in fields(study_mod.CellConfig):
        if f.name == "seed":
            continue  # provided by the common flags
        flag = "--" + f.name.replace("_", "-")
        if f.type == "int":
            p.add_argument(flag, type=int, default=f.default)
        elif f.type == "float":
            p.add_argument(flag, type=float, default=f.default)
        else:
            p.add_argument(flag, type=str, default=f.default)
    _add_common(p)

    p = command("report", "rebuild the combined report table from a sandbox output dir")
    p.add_argument("--results", required=True, help="directory written by `sandbox`")
    _add_common(p)

    p = command("gen-noise", "write a noise dataset as a feature file")
    p.add_argument("--kind", choices=("gaussian", "saltpepper"), default="gaussian")
    p.add_argument("--n", type=int, required=True, help="number of rows")
    p.add_argument("--shape", default="28x28", help="image shape, e.g. 28x28 or 32x32x3")
    p.add_argument("--out", required=True, help="output feature file")
    _add_common(p)

    p = command("gen-synth", "write seeded Gaussian blobs as a labelled feature file")
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--per-class", type=int, default=200)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--spread", type=float, default=2.0)
    p.add_argument("--shift", type=float, default=0.0)
    p.add_argument("--out", required=True)
    _add_common(p)

    p = command("density", "export paired per-feature histograms for plotting")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--feature", type=int, required=True, help="feature column index")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--fmt", choices=("binary", "csv"), default="binary")
    p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")
    _add_common(p)

    return parser


def _apply_env_overrides(parser: _Parser, argv: list[str]) -> None:
    """Environment variables named SSDLBOX_<FLAG> become subcommand defaults."""
    if not argv:
        return
    sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    if not sub_actions:
        return
    sub = sub_actions[0].choices.get(argv[0])
    if sub is None:
        return
    for action in sub._actions:
        if not action.option_strings or action.dest == "help":
            continue
        env_name = ENV_PREFIX + action.dest.upper()
        if env_name not in os.environ:
            continue
        raw = os.environ[env_name]
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes")
        elif action.type is not None:
            value = action.type(raw)
        else:
            value = raw
        if action.choices and value not in action.choices:
            raise UsageError(f"{env_name}={raw!r}: not one of {sorted(action.choices)}")
        sub.set_defaults(**{action.dest: value})


def _config_echo(args: argparse.Namespace) -> dict:
    skip = {"command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(payload: dict, args, table_text: str | None = None) -> None:
    if getattr(args, "format", "json") == "table" and table_text is not None:
        header = "".join(
            f"# {k} = {v}\n" for k, v in _config_echo(args).items()
        )
        sys.stdout.write(header + table_text)
    else:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load(path: str, fmt: str) -> FeatureMatrix:
    return load_features(path, fmt)


def _maybe_standardized(matrix: FeatureMatrix, flag: bool) -> FeatureMatrix:
    if not flag:
        return matrix
    z, _, _ = standardize(matrix)
    return FeatureMatrix(z, name=matrix.name)


def _cmd_dist(args) -> int:
    a = _maybe_standardized(_load(args.a, args.fmt), args.standardize)
    b = _maybe_standardized(_load(args.b, args.fmt), args.standardize)
    spec = SubsampleSpec(tau=args.tau, draws=args.draws, seed=args.seed)
    report = dissimilarity(a, b, spec, args.measure.upper(), args.bins)
    payload = {"config": _config_echo(args), "report": report.to_dict()}
    table = (
        f"measure  mean      std       p_value\n"
        f"{report.measure:<8} {report.mean:<9.4f} {report.std:<9.4f} {report.p_value:.4g}\n"
    )
    _emit(payload, args, table)
    return 0


def _cmd_rank(args) -> int:
    labelled = _load(args.labelled, args.fmt)
    names = [tok for tok in args.candidates.split(",") if tok]
    candidates = [(name, _load(name, args.fmt)) for name in names]
    spec = SubsampleSpec(tau=args.tau, draws=args.draws, seed=args.seed)
    ranked = rank_candidates(labelled, candidates, spec, args.measure.upper(), args.bins)
    payload = {
        "config": _config_echo(args),
        "ranking": [
            {"rank": i + 1, "name": name, **report.to_dict()}
            for i, (name, report) in enumerate(ranked)
        ],
    }
    lines = ["rank  name  mean  p_value"]
    for i, (name, report) in enumerate(ranked):
        lines.append(f"{i + 1}  {name}  {report.mean:.4f}  {report.p_value:.4g}")
    _emit(payload, args, "\n".join(lines) + "\n")
    return 0


def _cmd_sandbox(args) -> int:
    with open(args.grid) as fh:
        raw = study_mod.parse_grid_text(fh.read())
    raw.setdefault("seed", [str(args.seed)])
    cells = study_mod.expand_grid(raw)
    result = study_mod.run_grid(cells, jobs=args.jobs)
    study_mod.write_study(args.out, result)
    payload = {
        "config": _config_echo(args),
        "cells": len(result.cells),
        "rows": len(result.rows),
        "out": args.out,
        "correlations": result.correlations,
    }
    _emit(payload, args, report_text(result.rows))
    return 0


def _cmd_train(args) -> int:
    kwargs = {
        f.name: getattr(args, f.name) for f in fields(study_mod.CellConfig)
    }
    cell = study_mod.CellConfig(**kwargs)
    payload_cell = study_mod.run_cell(cell)
    payload = {"config": _config_echo(args), "result": payload_cell}
    _emit(payload, args, None)
    return 0


def _cmd_report(args) -> int:
    path = os.path.join(args.results, "report_matrix.csv")
    if not os.path.exists(path):
        raise DataError(f"{path}: not found; run `ssdlbox sandbox` first")
    with open(path) as fh:
        csv_text = fh.read()
    payload = {"config": _config_echo(args), "report_csv": csv_text}
    _emit(payload, args, csv_text)
    return 0


def _parse_shape(text: str) -> tuple[int, ...]:
    try:
        shape = tuple(int(tok) for tok in text.lower().split("x"))
    except ValueError as exc:
        raise DataError(f"bad shape {text!r}: {exc}") from exc
    if not shape or any(s < 1 for s in shape):
        raise DataError(f"bad shape {text!r}")
    return shape


def _cmd_gen_noise(args) -> int:
    shape = _parse_shape(args.shape)
    if args.kind == "gaussian":
        raw = gen_gaussian_noise(args.n, shape, args.seed)
    else:
        raw = gen_salt_pepper(args.n, shape, args.seed)
    matrix = FeatureMatrix(raw.reshape(args.n, -1), name=os.path.basename(args.out))
    save_features(matrix, args.out)
    payload = {
        "config": _config_echo(args),
        "written": {"path": args.out, "n": matrix.n, "d": matrix.d},
    }
    _emit(payload, args, f"wrote {args.out}: n={matrix.n} d={matrix.d}\n")
    return 0


def _cmd_gen_synth(args) -> int:
    blobs = gen_synthetic_clusters(
        num_classes=args.classes,
        per_class=args.per_class,
        dim=args.dim,
        spread=args.spread,
        shift=args.shift,
        seed=args.seed,
        name=os.path.basename(args.out),
    )
    save_features(blobs.features, args.out)
    save_labels(blobs.labels, args.out)
    payload = {
        "config": _config_echo(args),
        "written": {
            "path": args.out,
            "labels": args.out + ".labels",
            "n": blobs.features.n,
            "d": blobs.features.d,
        },
    }
    _emit(payload, args, f"wrote {args.out}: n={blobs.features.n} d={blobs.features.d}\n")
    return 0


def _cmd_density(args) -> int:
    a = _load(args.a, args.fmt)
    b = _load(args.b, args.fmt)
    _, _, rows = feature_density_export(a, b, args.feature, args.bins)
    csv_text = density_csv(rows)
    if args.out == "-":
        payload = {
            "config": _config_echo(args),
            "rows": [list(r) for r in rows],
        }
        _emit(payload, args, csv_text)
    else:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
        payload = {"config": _config_echo(args), "written": args.out}
        _emit(payload, args, f"wrote {args.out}\n")
    return 0


_COMMANDS = {
    "dist": _cmd_dist,
    "rank": _cmd_rank,
    "sandbox": _cmd_sandbox,
    "train": _cmd_train,
    "report": _cmd_report,
    "gen-noise": _cmd_gen_noise,
    "gen-synth": _cmd_gen_synth,
    "density": _cmd_density,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_env_overrides(parser, argv)
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
