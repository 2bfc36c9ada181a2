"""Synthetic scenario generation and FWER/power studies.

A study draws datasets from a Gaussian linear model with a chosen
correlation design and signal-to-noise ratio, runs the sequential
rejection engine under one or several adjustment policies (sharing the
splits, screening, and p-value tensor across policies within a run), and
scores familywise errors and minimal true detections.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

from .clustering import complete_linkage, correlation_distance
from .dataset import Dataset
from .engine import (
    PValueTensor,
    RejectionState,
    RunConfig,
    compute_pvalue_tensor,
    sequential_rejection,
)
from .hierarchy import HypothesisCollection
from .multiplicity import AdjustmentPolicy
from .splitting import make_splits

__all__ = [
    "Scenario",
    "PowerReport",
    "equicorr_design",
    "block_design",
    "make_beta",
    "sigma_for_snr",
    "minimal_true_detections",
    "performance_scores",
    "run_study",
    "run_comparison",
    "report_table_csv",
]

# substreams hung off (scenario seed, run index)
_DESIGN_STREAM = 0
_BETA_STREAM = 1
_NOISE_STREAM = 2
_ENGINE_STREAM = 3


@dataclass(frozen=True)
class Scenario:
    """One synthetic study design.

    `design` is "equicorr" (every pair of covariates has correlation
    rho) or "blocks" (correlation rho inside consecutive blocks of
    `block_size`, zero across). `beta_value` is a constant or a (lo, hi)
    uniform range; the noise level is set from `snr` per realized design.
    """

    n: int
    p: int
    design: str = "equicorr"
    rho: float = 0.0
    block_size: int | None = None
    s0: int = 1
    beta_value: float | tuple[float, float] = 1.0
    snr: float = 1.0
    runs: int = 100
    seed: int = 0
    placement: str = "spread"
    fix_design: bool = False
    redraw_beta: bool = False

    def __post_init__(self) -> None:
        if self.design not in ("equicorr", "blocks"):
            raise ValueError(f"unknown design {self.design!r}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must be in [0, 1)")
        if self.design == "blocks":
            if self.block_size is None or self.block_size < 1:
                raise ValueError("blocks design needs a positive block_size")
        if not 0 <= self.s0 <= self.p:
            raise ValueError("s0 must be between 0 and p")
        if self.snr <= 0.0:
            raise ValueError("snr must be positive")
        if self.runs < 1:
            raise ValueError("need at least one run")
        if self.placement not in ("spread", "random"):
            raise ValueError(f"unknown placement {self.placement!r}")

    def to_json_dict(self) -> dict:
        value = self.beta_value
        return {
            "n": self.n,
            "p": self.p,
            "design": self.design,
            "rho": self.rho,
            "block_size": self.block_size,
            "s0": self.s0,
            "beta_value": list(value) if isinstance(value, tuple) else value,
            "snr": self.snr,
            "runs": self.runs,
            "seed": self.seed,
            "placement": self.placement,
            "fix_design": self.fix_design,
            "redraw_beta": self.redraw_beta,
        }

    @classmethod
    def from_json_dict(cls, payload: Mapping) -> "Scenario":
        known = {
            "n",
            "p",
            "design",
            "rho",
            "block_size",
            "s0",
            "beta_value",
            "snr",
            "runs",
            "seed",
            "placement",
            "fix_design",
            "redraw_beta",
        }
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        if "n" not in payload or "p" not in payload:
            raise ValueError("scenario needs at least n and p")
        data = dict(payload)
        if isinstance(data.get("beta_value"), list):
            lo, hi = data["beta_value"]
            data["beta_value"] = (float(lo), float(hi))
        return cls(**data)


def _rng(seed: int, run: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run, stream)))


def _as_generator(seed: int | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def equicorr_design(
    n: int, p: int, rho: float, seed: int | np.random.Generator = 0
) -> np.ndarray:
    """Gaussian rows with unit variances and constant pairwise correlation.

    Built as sqrt(rho) * shared + sqrt(1-rho) * idiosyncratic per row.
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must be in [0, 1)")
    rng = _as_generator(seed)
    shared = rng.standard_normal((n, 1))
    own = rng.standard_normal((n, p))
    return np.sqrt(rho) * shared + np.sqrt(1.0 - rho) * own


def block_design(
    n: int,
    p: int,
    block_size: int,
    rho: float,
    seed: int | np.random.Generator = 0,
) -> np.ndarray:
    """Block-diagonal correlation: rho within consecutive blocks, zero across.

    The last block is smaller when block_size does not divide p.
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must be in [0, 1)")
    if block_size < 1:
        raise ValueError("block_size must be positive")
    rng = _as_generator(seed)
    X = np.empty((n, p))
    for start in range(0, p, block_size):
        width = min(block_size, p - start)
        shared = rng.standard_normal((n, 1))
        own = rng.standard_normal((n, width))
        X[:, start : start + width] = np.sqrt(rho) * shared + np.sqrt(1.0 - rho) * own
    return X


def make_beta(
    p: int,
    s0: int,
    placement: str = "spread",
    value_rule: float | tuple[float, float] = 1.0,
    seed: int | np.random.Generator = 0,
    block_size: int | None = None,
) -> tuple[np.ndarray, frozenset[int]]:
    """Coefficient vector with s0 active entries and its active set.

    Spread placement puts one active variable at the head of each
    consecutive block (evenly spaced when no block size applies), so
    every active variable keeps correlated inactive neighbours; random
    placement samples positions without replacement.
    """
    if not 0 <= s0 <= p:
        raise ValueError("s0 must be between 0 and p")
    rng = _as_generator(seed)
    if s0 == 0:
        return np.zeros(p), frozenset()
    if placement == "spread":
        stride = block_size if block_size else max(1, p // s0)
        positions = [j * stride for j in range(s0)]
        if positions[-1] >= p:
            raise ValueError("spread placement does not fit: s0 too large for the blocks")
    elif placement == "random":
        positions = sorted(int(j) for j in rng.choice(p, size=s0, replace=False))
    else:
        raise ValueError(f"unknown placement {placement!r}")
    beta = np.zeros(p)
    if isinstance(value_rule, tuple):
        lo, hi = value_rule
        values = rng.uniform(lo, hi, size=s0)
    else:
        values = np.full(s0, float(value_rule))
    beta[positions] = values
    return beta, frozenset(positions)


def sigma_for_snr(X: np.ndarray, beta: np.ndarray, snr: float) -> float:
    """Noise level sigma making the realized signal-to-noise ratio exact.

    The target ratio is ||X beta|| / (sqrt(n) * sigma).
    """
    if snr <= 0.0:
        raise ValueError("snr must be positive")
    X = np.asarray(X, dtype=float)
    beta = np.asarray(beta, dtype=float)
    energy = float(beta @ (X.T @ (X @ beta)))
    if energy <= 0.0:
        raise ValueError("beta has no signal through this design")
    return float(np.sqrt(energy / X.shape[0]) / snr)


def minimal_true_detections(
    state: RejectionState,
    collection: HypothesisCollection,
    active: frozenset[int],
) -> frozenset[int]:
    """Rejected clusters that contain an active variable and no rejected
    strict sub-cluster."""
    member_sets = {cid: frozenset(collection.members(cid)) for cid in state.rejected}
    out = set()
    for cid, members in member_sets.items():
        if not members & active:
            continue
        if any(other < members for other in member_sets.values()):
            continue
        out.add(cid)
    return frozenset(out)


def performance_scores(
    mtd_members: Iterable[tuple[int, ...]], active: frozenset[int]
) -> tuple[float, float]:
    """The two resolution-weighted detection scores in [0, 1].

    The first averages 1/|C| over minimal true detections; the second
    averages (1/|C| + 1)/2 over those of size at most 20.
    """
    if not active:
        raise ValueError("no active variables to score against")
    score1 = 0.0
    score2 = 0.0
    for members in mtd_members:
        size = len(members)
        score1 += 1.0 / size
        if size <= 20:
            score2 += 0.5 * (1.0 / size + 1.0)
    return score1 / len(active), score2 / len(active)


@dataclass(frozen=True)
class PowerReport:
    method: str
    shaffer: bool
    runs: int
    fwer_count: int
    avg_mtd: float
    avg_std: float
    perf1: float
    perf2: float
    records: tuple[dict, ...] = field(repr=False, default=())

    def to_json_dict(self, include_records: bool = True) -> dict:
        out = {
            "method": self.method,
            "shaffer": self.shaffer,
            "runs": self.runs,
            "fwer_count": self.fwer_count,
            "avg_mtd": self.avg_mtd,
            "avg_std": self.avg_std,
            "perf1": self.perf1,
            "perf2": self.perf2,
        }
        if include_records:
            out["records"] = list(self.records)
        return out


def _simulate_dataset(
    scenario: Scenario, run: int
) -> tuple[Dataset, frozenset[int], float, int]:
    design_run = 0 if scenario.fix_design else run
    design_rng = _rng(scenario.seed, design_run, _DESIGN_STREAM)
    if scenario.design == "equicorr":
        X = equicorr_design(scenario.n, scenario.p, scenario.rho, design_rng)
    else:
        X = block_design(
            scenario.n, scenario.p, scenario.block_size, scenario.rho, design_rng
        )
    beta_run = run if scenario.redraw_beta else 0
    beta, active = make_beta(
        scenario.p,
        scenario.s0,
        scenario.placement,
        scenario.beta_value,
        _rng(scenario.seed, beta_run, _BETA_STREAM),
        scenario.block_size,
    )
    noise_rng = _rng(scenario.seed, run, _NOISE_STREAM)
    if scenario.s0 > 0:
        sigma = sigma_for_snr(X, beta, scenario.snr)
    else:
        sigma = 1.0
    y = X @ beta + sigma * noise_rng.standard_normal(scenario.n)
    engine_seed = int(
        np.random.SeedSequence(scenario.seed, spawn_key=(run, _ENGINE_STREAM)).generate_state(
            1, np.uint64
        )[0]
    )
    return Dataset(X, y), active, sigma, engine_seed


def _leaf_tensor(tensor: PValueTensor, leaf_ids: list[int]) -> PValueTensor:
    rows = np.array([tensor.cluster_ids.index(cid) for cid in leaf_ids])
    return PValueTensor(leaf_ids, tensor.values[rows])


def _run_once(
    scenario: Scenario, config: RunConfig, policies: tuple[tuple[str, AdjustmentPolicy], ...], run: int
) -> dict:
    dataset, active, sigma, engine_seed = _simulate_dataset(scenario, run)
    run_config = replace(config, seed=engine_seed)
    plan = make_splits(dataset.n, run_config.splits, engine_seed)

    needs_tree = any(policy.needs_tree for _, policy in policies)
    needs_single = any(not policy.needs_tree for _, policy in policies)
    collections: dict[str, HypothesisCollection] = {}
    tensors: dict[str, PValueTensor] = {}
    screened_splits = None
    if needs_tree:
        tree = complete_linkage(correlation_distance(dataset.X))
        collections["tree"] = HypothesisCollection.from_tree(tree)
        screened_splits, tensors["tree"] = compute_pvalue_tensor(
            dataset, plan, collections["tree"], run_config
        )
    if needs_single:
        collections["single"] = HypothesisCollection.singletons(dataset.p)
        if needs_tree:
            # leaves of the tree tensor are exactly the singleton clusters
            tensors["single"] = _leaf_tensor(
                tensors["tree"], collections["tree"].tree.leaf_ids
            )
        else:
            screened_splits, tensors["single"] = compute_pvalue_tensor(
                dataset, plan, collections["single"], run_config
            )

    record: dict = {"run": run, "sigma": sigma, "active": sorted(active), "methods": {}}
    for name, policy in policies:
        side = "tree" if policy.needs_tree else "single"
        collection = collections[side]
        state = sequential_rejection(
            tensors[side],
            screened_splits,
            policy,
            run_config.aggregation,
            run_config.alpha,
            collection,
        )
        rejection_members = [list(collection.members(cid)) for cid in sorted(state.rejected)]
        mtd_ids = minimal_true_detections(state, collection, active)
        mtd_members = [collection.members(cid) for cid in sorted(mtd_ids)]
        n_std = sum(1 for members in mtd_members if len(members) == 1)
        if active:
            perf1, perf2 = performance_scores(mtd_members, active)
        else:
            perf1 = perf2 = 0.0
        fwer = any(not (set(members) & active) for members in rejection_members)
        record["methods"][name] = {
            "rejections": rejection_members,
            "fwer": bool(fwer),
            "mtds": [list(members) for members in mtd_members],
            "n_mtd": len(mtd_members),
            "n_std": n_std,
            "perf1": perf1,
            "perf2": perf2,
        }
    return record


def run_comparison(
    scenario: Scenario,
    config: RunConfig,
    policies: Mapping[str, AdjustmentPolicy],
    n_jobs: int = 1,
) -> dict[str, PowerReport]:
    """Run the study once per dataset, scoring every policy on shared splits.

    All policies inside a run see the same data, splits, screening, and
    p-values, so cross-policy comparisons are paired. Runs are
    independent and may execute in parallel; results are deterministic
    either way because every seed derives from the run index.
    """
    policy_items = tuple(policies.items())
    runs = range(scenario.runs)
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            records = list(
                pool.map(
                    _run_once,
                    [scenario] * scenario.runs,
                    [config] * scenario.runs,
                    [policy_items] * scenario.runs,
                    runs,
                )
            )
    else:
        records = [_run_once(scenario, config, policy_items, run) for run in runs]

    reports: dict[str, PowerReport] = {}
    for name, policy in policy_items:
        per_method = [record["methods"][name] for record in records]
        reports[name] = PowerReport(
            method=policy.kind,
            shaffer=policy.shaffer,
            runs=scenario.runs,
            fwer_count=sum(1 for entry in per_method if entry["fwer"]),
            avg_mtd=float(np.mean([entry["n_mtd"] for entry in per_method])),
            avg_std=float(np.mean([entry["n_std"] for entry in per_method])),
            perf1=float(np.mean([entry["perf1"] for entry in per_method])),
            perf2=float(np.mean([entry["perf2"] for entry in per_method])),
            records=tuple(
                {**record, "methods": {name: record["methods"][name]}} for record in records
            ),
        )
    return reports


def run_study(scenario: Scenario, config: RunConfig, n_jobs: int = 1) -> PowerReport:
    """Run the study for the single policy named in `config`."""
    reports = run_comparison(scenario, config, {"method": config.policy}, n_jobs=n_jobs)
    return reports["method"]


def report_table_csv(reports: Mapping[str, PowerReport]) -> str:
    """One CSV row per method: detection counts and performance scores."""
    lines = ["method,shaffer,runs,fwer_count,avg_mtds,avg_stds,perf1,perf2"]
    for name in reports:
        r = reports[name]
        lines.append(
            f"{r.method},{int(r.shaffer)},{r.runs},{r.fwer_count},"
            f"{r.avg_mtd:.6g},{r.avg_std:.6g},{r.perf1:.6g},{r.perf2:.6g}"
        )
    return "\n".join(lines) + "\n"
