"""Command-line surface: cluster trees, dataset analysis, simulation studies.

Exit codes are a stable contract for scripting: 0 success, 1 internal
error, 2 user-input error (bad files, bad flags, invalid combinations).
All outputs are deterministic functions of the inputs, flags, and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .aggregation import AggregationConfig
from .clustering import complete_linkage, correlation_distance
from .dataset import read_csv_columns, read_csv_dataset
from .engine import RunConfig, compute_pvalue_tensor, result_dict, sequential_rejection
from .hierarchy import HypothesisCollection
from .multiplicity import POLICY_KINDS, AdjustmentPolicy
from .simulation import Scenario, report_table_csv, run_comparison
from .splitting import make_splits

__all__ = ["main"]

_SCHEMA = "seqreject/1"


def _resolve_seed(explicit: int | None, fallback: int = 0) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("SEQREJECT_SEED")
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"SEQREJECT_SEED is not an integer: {env!r}") from None
    return fallback


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _aggregation_from_args(args: argparse.Namespace) -> AggregationConfig:
    if args.gamma is not None:
        return AggregationConfig(mode="fixed", gamma=args.gamma)
    return AggregationConfig(
        mode="adaptive", gamma_min=args.gamma_min, gamma_step=args.gamma_step
    )


def _add_engine_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.05, help="significance level")
    parser.add_argument("--splits", type=int, default=50, help="number of sample splits")
    parser.add_argument("--seed", type=int, default=None, help="master seed (falls back to SEQREJECT_SEED, then 0)")
    parser.add_argument("--gamma-min", type=float, default=0.05, dest="gamma_min")
    parser.add_argument("--gamma-step", type=float, default=0.025, dest="gamma_step")
    parser.add_argument(
        "--gamma",
        type=float,
        default=None,
        help="aggregate at this fixed quantile level instead of searching the grid",
    )
    parser.add_argument(
        "--intercept", action="store_true", help="include an intercept in the tested models"
    )


def cmd_cluster(args: argparse.Namespace) -> int:
    X, names = read_csv_columns(args.input, exclude=args.response)
    if X.shape[1] < 2:
        raise ValueError("need at least 2 covariate columns to cluster")
    tree = complete_linkage(correlation_distance(X))
    out_prefix = args.out if args.out else str(Path(args.input).with_suffix(""))
    written = []
    if args.format in ("json", "both"):
        path = out_prefix + ".json"
        _write_json(path, {"schema": _SCHEMA, "names": list(names), "hierarchy": tree.to_json_dict()})
        written.append(path)
    if args.format in ("newick", "both"):
        path = out_prefix + ".nwk"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(tree.to_newick(list(names)) + "\n")
        written.append(path)
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    dataset = read_csv_dataset(args.input, args.response)
    seed = _resolve_seed(args.seed)
    policy = AdjustmentPolicy(args.method, shaffer=args.shaffer)
    config = RunConfig(
        policy=policy,
        alpha=args.alpha,
        splits=args.splits,
        seed=seed,
        aggregation=_aggregation_from_args(args),
        intercept=args.intercept,
    )
    if policy.needs_tree:
        tree = complete_linkage(correlation_distance(dataset.X))
        collection = HypothesisCollection.from_tree(tree)
    else:
        tree = None
        collection = HypothesisCollection.singletons(dataset.p)
    plan = make_splits(dataset.n, config.splits, config.seed)
    screened_splits, tensor = compute_pvalue_tensor(dataset, plan, collection, config)
    state = sequential_rejection(
        tensor, screened_splits, policy, config.aggregation, config.alpha, collection
    )
    payload = {"schema": _SCHEMA, "names": list(dataset.names or ()), **result_dict(state, screened_splits, collection, config)}
    if tree is not None:
        payload["hierarchy"] = tree.to_json_dict()
    _write_json(args.out, payload)
    print(f"rejected {len(state.rejected)} cluster(s); wrote {args.out}")
    return 0


def _parse_methods(spec: str) -> list[str]:
    if spec == "all":
        return list(POLICY_KINDS)
    methods = [m.strip() for m in spec.split(",") if m.strip()]
    for m in methods:
        if m not in POLICY_KINDS:
            raise ValueError(f"unknown method {m!r}; choose from {', '.join(POLICY_KINDS)}")
    if not methods:
        raise ValueError("no methods given")
    return methods


def cmd_simulate(args: argparse.Namespace) -> int:
    with open(args.scenario, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{args.scenario}: invalid JSON ({exc})") from None
    scenario = Scenario.from_json_dict(payload)
    if args.runs is not None:
        scenario = replace(scenario, runs=args.runs)
    if args.seed is not None or os.environ.get("SEQREJECT_SEED"):
        scenario = replace(scenario, seed=_resolve_seed(args.seed))
    methods = _parse_methods(args.methods)
    policies = {
        name: AdjustmentPolicy(name, shaffer=args.shaffer and name == "hier-inherit")
        for name in methods
    }
    config = RunConfig(
        policy=next(iter(policies.values())),
        alpha=args.alpha,
        splits=args.splits,
        seed=scenario.seed,
        aggregation=_aggregation_from_args(args),
        intercept=args.intercept,
    )
    reports = run_comparison(scenario, config, policies, n_jobs=max(1, args.parallel))
    payload = {
        "schema": _SCHEMA,
        "scenario": scenario.to_json_dict(),
        "alpha": config.alpha,
        "B": config.splits,
        "reports": {name: report.to_json_dict() for name, report in reports.items()},
    }
    _write_json(args.out, payload)
    with open(args.csv, "w", encoding="utf-8") as fh:
        fh.write(report_table_csv(reports))
    print(f"wrote {args.out} and {args.csv}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqreject",
        description=(
            "Familywise-error-controlled significance testing for groups of "
            "variables in high-dimensional linear regression"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cluster = sub.add_parser("cluster", help="build the covariate cluster tree from a CSV")
    cluster.add_argument("input", help="CSV file of covariates (header row required)")
    cluster.add_argument(
        "--response", default=None, help="column to exclude (treat as response)"
    )
    cluster.add_argument("--format", choices=("json", "newick", "both"), default="json")
    cluster.add_argument("--out", default=None, help="output path prefix")
    cluster.set_defaults(func=cmd_cluster)

    analyze = sub.add_parser("analyze", help="run the sequential rejection analysis on a CSV")
    analyze.add_argument("input", help="CSV file (response plus covariates)")
    analyze.add_argument(
        "--response", default=None, help="response column name (default: first column)"
    )
    analyze.add_argument("--method", required=True, choices=POLICY_KINDS)
    analyze.add_argument("--shaffer", action="store_true", help="apply the sibling factor")
    _add_engine_flags(analyze)
    analyze.add_argument("--out", default="result.json")
    analyze.set_defaults(func=cmd_analyze)

    simulate = sub.add_parser("simulate", help="run a simulation study from a scenario file")
    simulate.add_argument("scenario", help="scenario JSON file")
    simulate.add_argument("--runs", type=int, default=None, help="override scenario run count")
    simulate.add_argument("--parallel", type=int, default=1, help="worker processes")
    simulate.add_argument(
        "--methods", default="all", help='"all" or comma-separated method names'
    )
    simulate.add_argument("--shaffer", action="store_true")
    _add_engine_flags(simulate)
    simulate.add_argument("--out", default="report.json")
    simulate.add_argument("--csv", default="table.csv")
    simulate.set_defaults(func=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
