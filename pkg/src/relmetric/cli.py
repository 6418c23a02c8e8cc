"""Command-line entry point: dataset loading, constraint export, metric
learning, and the cross-validated condition/proportion tables.

Datasets are addressed as
  synthetic:default | synthetic:key=value,...   seeded generator
  movielens:<dir>                               MovieLens-100k native files
  <path to manifest.json>                       manifest + CSV files
Relative movielens/manifest paths are also resolved against
$RELMETRIC_DATA_DIR when set.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
failure. Output files carry no timestamps, so a repeated run with the
same seed is byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .constraints import (
    ConstraintBudget,
    build_relative_triples,
    label_constraints,
    mix_constraints,
    relative_link_constraints,
    select_link_strength_constraints,
    write_comparisons,
)
from .errors import (
    InvalidCorrelationError,
    MetricError,
    RelmetricError,
)
from .evaluation import DEFAULT_PROPORTIONS, EvalConfig, cross_validate, proportion_sweep
from .ingest import export_schema, load_schema
from .linkstrength import params_for, strength_breakdown
from .movielens import load_movielens
from .synthetic import generate_synthetic

log = logging.getLogger("relmetric")

_SYNTH_INT_KEYS = {
    "n_parents", "n_children", "n_classes", "alpha", "beta", "seed",
    "n_informative", "n_noise", "degree_low", "degree_high",
}
_SYNTH_FLOAT_KEYS = {
    "rho", "class_scale", "within_scale", "noise_scale", "assoc_noise",
}


class UsageError(Exception):
    """Configuration problem: maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _resolve_path(path: str) -> str:
    if os.path.exists(path):
        return path
    base = os.environ.get("RELMETRIC_DATA_DIR", "")
    if base:
        candidate = os.path.join(base, path)
        if os.path.exists(candidate):
            return candidate
    return path


def _parse_synthetic_params(spec: str) -> dict:
    if spec in ("", "default"):
        return {}
    params = {}
    for item in spec.split(","):
        if "=" not in item:
            raise UsageError(f"bad synthetic parameter {item!r} (expected key=value)")
        key, value = item.split("=", 1)
        key = key.strip()
        if key in _SYNTH_INT_KEYS:
            params[key] = int(value)
        elif key in _SYNTH_FLOAT_KEYS:
            params["link_label_correlation" if key == "rho" else key] = float(value)
        else:
            raise UsageError(f"unknown synthetic parameter {key!r}")
    return params


def load_dataset(spec: str, task: str = "genre"):
    """Build a schema from a dataset spec string."""
    if spec.startswith("synthetic:"):
        return generate_synthetic(**_parse_synthetic_params(spec[len("synthetic:"):]))
    if spec == "synthetic":
        return generate_synthetic()
    if spec.startswith("movielens:"):
        return load_movielens(_resolve_path(spec[len("movielens:"):]), task=task)
    if spec.startswith("manifest:"):
        return load_schema(_resolve_path(spec[len("manifest:"):]))
    return load_schema(_resolve_path(spec))


def _result_record(r) -> dict:
    return {
        "condition": r.condition,
        "learner": r.learner,
        "accuracy_mean": r.accuracy_mean,
        "accuracy_std": r.accuracy_std,
        "per_fold": [list(row) for row in r.per_fold],
        "budgets": list(r.budgets),
        "seed": r.seed,
        "proportion": r.proportion,
        "flags": list(r.flags),
    }


def _row_name(r) -> str:
    if r.proportion is not None and r.condition == "Mixed":
        return f"p={r.proportion:g}"
    return r.condition


def _write_outputs(output: str, stem: str, payload: dict, results) -> None:
    os.makedirs(output, exist_ok=True)
    run_path = os.path.join(output, f"{stem}.json")
    with open(run_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    txt_path = os.path.join(output, f"{stem}_table.txt")
    budgets = results[0].budgets if results else ()
    name_w = max([len(_row_name(r)) for r in results] + [9])
    with open(txt_path, "w", encoding="utf-8") as fh:
        header = f"{'condition':<{name_w}}  {'accuracy':>16}"
        header += "".join(f"  {'n=' + str(b):>8}" for b in budgets)
        fh.write(header + "\n")
        for r in results:
            cell = f"{r.accuracy_mean:.2f} +/- {r.accuracy_std:.2f}"
            line = f"{_row_name(r):<{name_w}}  {cell:>16}"
            line += "".join(f"  {v:>8.2f}" for v in r.per_budget)
            if r.flags:
                line += "   [" + ",".join(r.flags) + "]"
            fh.write(line + "\n")

    csv_path = os.path.join(output, f"{stem}_table.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["condition", "proportion", "accuracy_mean", "accuracy_std"]
            + [f"budget_{b}" for b in budgets]
            + ["flags"]
        )
        for r in results:
            writer.writerow(
                [
                    r.condition,
                    "" if r.proportion is None else f"{r.proportion:g}",
                    f"{r.accuracy_mean:.17g}",
                    f"{r.accuracy_std:.17g}",
                    *(f"{v:.17g}" for v in r.per_budget),
                    ";".join(r.flags),
                ]
            )
    print(f"wrote {run_path}")
    print(f"wrote {txt_path}")
    print(f"wrote {csv_path}")
    with open(txt_path, encoding="utf-8") as fh:
        sys.stdout.write(fh.read())


def _eval_config(args) -> EvalConfig:
    budgets = tuple(int(b) for b in args.budgets.split(","))
    return EvalConfig(
        k_neighbors=args.k, folds=args.folds, seed=args.seed, constraint_budgets=budgets
    )


def cmd_run(args) -> int:
    schema = load_dataset(args.dataset, task=args.task)
    config = _eval_config(args)
    conditions = [c.strip() for c in args.conditions.split(",") if c.strip()]
    if not conditions:
        raise UsageError("no conditions requested")
    results = [
        cross_validate(schema, cond, learner=args.learner, config=config)
        for cond in conditions
    ]
    payload = {
        "command": "run",
        "dataset": args.dataset,
        "task": args.task,
        "learner": args.learner,
        "conditions": conditions,
        "eval": {
            "k_neighbors": config.k_neighbors,
            "folds": config.folds,
            "seed": config.seed,
            "constraint_budgets": list(config.constraint_budgets),
        },
        "results": [_result_record(r) for r in results],
    }
    _write_outputs(args.output, "run", payload, results)
    return 0


def cmd_sweep(args) -> int:
    schema = load_dataset(args.dataset, task=args.task)
    config = _eval_config(args)
    proportions = [float(p) for p in args.proportions.split(",")]
    results = proportion_sweep(schema, args.learner, proportions, config)
    payload = {
        "command": "sweep",
        "dataset": args.dataset,
        "task": args.task,
        "learner": args.learner,
        "proportions": proportions,
        "eval": {
            "k_neighbors": config.k_neighbors,
            "folds": config.folds,
            "seed": config.seed,
            "constraint_budgets": list(config.constraint_budgets),
        },
        "results": [_result_record(r) for r in results],
    }
    _write_outputs(args.output, "sweep", payload, results)
    return 0


def cmd_inspect_pair(args) -> int:
    schema = load_dataset(args.dataset, task=args.task)
    params = params_for(schema.association)
    info = strength_breakdown(schema.parent_index(), params, args.i, args.j)
    print(f"pair: ({args.i}, {args.j})")
    print(f"common parents: {info['count']}")
    print(f"gamma: {info['gamma']:.6g}")
    if info["parents"]:
        print(f"{'parent':<12} {'w':>10} {'z':>10} {'term':>10}")
        for parent, w, z, term in info["parents"]:
            print(f"{parent:<12} {w:>10.6f} {z:>10.6f} {term:>10.6f}")
    print(f"link strength: {info['total']:.10g}")
    return 0


def cmd_gen_synthetic(args) -> int:
    params = _parse_synthetic_params(args.params)
    schema = generate_synthetic(**params)
    manifest = export_schema(schema, args.out)
    n_assoc = schema.association.n_rows
    print(f"wrote {manifest} ({schema.child_table.n} children, {n_assoc} association rows)")
    return 0


def cmd_export_constraints(args) -> int:
    schema = load_dataset(args.dataset, task=args.task)
    child = schema.child_table
    budget = ConstraintBudget(args.constraints, seed=args.seed)
    if args.strategy == "label":
        pairs = label_constraints(child.labels, budget)
    elif args.strategy == "rel":
        pairs = relative_link_constraints(schema.parent_index(), budget)
    elif args.strategy == "ls":
        pairs = select_link_strength_constraints(
            schema.parent_index(), params_for(schema.association), budget
        )
    else:  # mixed
        lab = label_constraints(child.labels, budget)
        ls = select_link_strength_constraints(
            schema.parent_index(), params_for(schema.association), budget
        )
        pairs = mix_constraints(lab, ls, args.proportion, seed=args.seed)
    triples = build_relative_triples(pairs)
    write_comparisons(triples, args.out)
    print(f"wrote {args.out} ({len(triples)} comparisons from {len(pairs)} pairs)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relmetric", description=__doc__)
    parser.add_argument("--version", action="version", version=f"relmetric {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--dataset", required=True, help="dataset spec (see module help)")
        p.add_argument("--task", default="genre", help="movielens task: genre or age")
        p.add_argument("--seed", type=int, default=0)

    def add_eval(p):
        p.add_argument("--learner", choices=("itml", "lsml"), default="itml")
        p.add_argument("--k", type=int, default=5, help="k-NN neighbours")
        p.add_argument("--folds", type=int, default=3)
        p.add_argument("--budgets", default="100,200,300,400,500",
                       help="comma-separated constraint budgets")
        p.add_argument("--output", default="runs", help="output directory")

    p_run = sub.add_parser("run", help="cross-validated condition table")
    add_common(p_run)
    add_eval(p_run)
    p_run.add_argument("--conditions", default="euc,lab,rel,ls",
                       help="comma list from euc,lab,rel,ls,both")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="label/link-strength proportion table")
    add_common(p_sweep)
    add_eval(p_sweep)
    p_sweep.add_argument(
        "--proportions", default=",".join(f"{p:g}" for p in DEFAULT_PROPORTIONS)
    )
    p_sweep.set_defaults(func=cmd_sweep)

    p_ins = sub.add_parser("inspect-pair", help="per-parent link-strength breakdown")
    add_common(p_ins)
    p_ins.add_argument("i", help="first child entity id")
    p_ins.add_argument("j", help="second child entity id")
    p_ins.set_defaults(func=cmd_inspect_pair)

    p_gen = sub.add_parser("gen-synthetic", help="write a synthetic dataset as manifest+CSV")
    p_gen.add_argument("--params", default="default",
                       help="key=value list, e.g. rho=0.8,n_children=600,seed=1")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.set_defaults(func=cmd_gen_synthetic)

    p_exp = sub.add_parser("export-constraints", help="write comparisons to a text file")
    add_common(p_exp)
    p_exp.add_argument("--strategy", choices=("label", "rel", "ls", "mixed"), default="ls")
    p_exp.add_argument("--constraints", type=int, default=300, help="pairs to sample")
    p_exp.add_argument("--proportion", type=float, default=0.5,
                       help="label share for strategy mixed")
    p_exp.add_argument("--out", required=True, help="output file")
    p_exp.set_defaults(func=cmd_export_constraints)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MetricError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        log.debug("numerical failure detail", exc_info=True)
        return 3
    except (ValueError, InvalidCorrelationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except RelmetricError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
