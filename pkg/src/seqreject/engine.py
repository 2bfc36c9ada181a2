"""The sequential rejection loop tying screening, testing, adjustment and
aggregation together.

Starting from no rejections, each pass aggregates every candidate
cluster's adjusted p-values across splits and rejects those at or below
the significance level; adjustments are recomputed each pass because
they may relax as the rejected set grows. The loop stops at the first
pass that rejects nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .aggregation import AggregationConfig, adjusted_pvalues, aggregate
from .dataset import Dataset
from .hierarchy import HypothesisCollection, extinct_branches
from .lowdim import split_pvalues
from .multiplicity import (
    AdjustmentPolicy,
    _hier_bonferroni_from_weights,
    _inheritance_from_weights,
    _shaffer_from_weights,
    bonferroni_adjustment,
    holm_adjustment,
    screened_weights,
)
from .screening import ScreenedSplit, ScreeningConfig, screen
from .splitting import SplitPlan, make_splits

__all__ = [
    "RunConfig",
    "PValueTensor",
    "Rejection",
    "RejectionState",
    "compute_pvalue_tensor",
    "successor",
    "sequential_rejection",
    "run",
    "result_dict",
]


@dataclass(frozen=True)
class RunConfig:
    policy: AdjustmentPolicy
    alpha: float = 0.05
    splits: int = 50
    seed: int = 0
    aggregation: AggregationConfig = AggregationConfig()
    intercept: bool = False
    screening: ScreeningConfig = ScreeningConfig()

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.splits < 1:
            raise ValueError("need at least one split")


class PValueTensor:
    """Raw p-values indexed by (cluster id, split)."""

    def __init__(self, cluster_ids: list[int], values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape[0] != len(cluster_ids):
            raise ValueError("one row per cluster required")
        self.cluster_ids = list(cluster_ids)
        self.values = values
        self._row = {cid: i for i, cid in enumerate(self.cluster_ids)}

    @property
    def n_splits(self) -> int:
        return self.values.shape[1]

    def row(self, cluster_id: int) -> np.ndarray:
        return self.values[self._row[cluster_id]]

    def value(self, cluster_id: int, split_id: int) -> float:
        return float(self.values[self._row[cluster_id], split_id])


@dataclass(frozen=True)
class Rejection:
    iteration: int
    cluster_id: int
    p_value: float


@dataclass
class RejectionState:
    """Rejected cluster ids plus the ordered record of when they fell.

    Each entry stores the aggregated p-value at the pass where the
    cluster was first rejected.
    """

    rejected: set[int] = field(default_factory=set)
    trace: list[Rejection] = field(default_factory=list)

    def p_value(self, cluster_id: int) -> float:
        for entry in self.trace:
            if entry.cluster_id == cluster_id:
                return entry.p_value
        raise KeyError(f"cluster {cluster_id} was not rejected")


def compute_pvalue_tensor(
    dataset: Dataset,
    plan: SplitPlan,
    collection: HypothesisCollection,
    config: RunConfig,
) -> tuple[list[ScreenedSplit], PValueTensor]:
    """Screen every split and test every cluster on its held-out half."""
    cluster_ids = collection.ids()
    members = [collection.members(cid) for cid in cluster_ids]
    screened_splits: list[ScreenedSplit] = []
    values = np.empty((len(cluster_ids), plan.count))
    for b, split in enumerate(plan.splits):
        screened = screen(dataset, split, config.screening, config.seed)
        screened_splits.append(screened)
        results = split_pvalues(dataset, screened, members, config.intercept)
        values[:, b] = [r if isinstance(r, float) else r.p_value for r in results]
    return screened_splits, PValueTensor(cluster_ids, values)


class _PolicyAdjuster:
    """Per-split adjustment factors with tree weights precomputed once."""

    def __init__(
        self,
        policy: AdjustmentPolicy,
        collection: HypothesisCollection,
        screened_splits: list[ScreenedSplit],
    ):
        self.policy = policy
        self.collection = collection
        self.screened_sets = [s.selected for s in screened_splits]
        if policy.needs_tree:
            if not collection.is_tree or collection.tree is None:
                raise ValueError(f"{policy.kind} requires a tree collection")
            tree = collection.tree
            if policy.shaffer and not tree.is_binary:
                raise ValueError("sibling factor requires a binary tree")
            self.weights = [screened_weights(tree, s) for s in self.screened_sets]
        else:
            if collection.is_tree:
                raise ValueError(f"{policy.kind} requires the singleton collection")
            self.weights = None

    def gated(self, cluster_id: int, rejected: set[int]) -> bool:
        """True when every adjustment is infinite regardless of the split."""
        if not self.policy.needs_tree:
            return False
        ancestors = self.collection.tree.ancestors(cluster_id)
        return not set(ancestors) <= rejected

    def adjustments(
        self, cluster_id: int, rejected: set[int], extinct: frozenset[int]
    ) -> np.ndarray:
        tree = self.collection.tree
        out = np.empty(len(self.screened_sets))
        for b, screened in enumerate(self.screened_sets):
            if self.policy.kind == "single-bonf":
                out[b] = bonferroni_adjustment(rejected, screened)
                continue
            if self.policy.kind == "single-holm":
                out[b] = holm_adjustment(rejected, screened)
                continue
            weights = self.weights[b]
            total = len(screened)
            if self.policy.kind == "hier-bonf":
                out[b] = _hier_bonferroni_from_weights(
                    cluster_id, rejected, weights, total, tree
                )
            else:
                value = _inheritance_from_weights(
                    cluster_id, rejected, weights, total, tree, extinct
                )
                if self.policy.shaffer:
                    value *= _shaffer_from_weights(cluster_id, rejected, weights, tree)
                out[b] = value
        return out


def _rejectable(
    adjuster: _PolicyAdjuster,
    tensor: PValueTensor,
    agg_config: AggregationConfig,
    alpha: float,
    rejected: set[int],
) -> dict[int, float]:
    """Aggregated p-values of the clusters that fall at this pass."""
    collection = adjuster.collection
    if collection.is_tree and adjuster.policy.kind == "hier-inherit":
        extinct = extinct_branches(collection.tree, rejected)
    else:
        extinct = frozenset()
    newly: dict[int, float] = {}
    for cluster_id in tensor.cluster_ids:
        if cluster_id in rejected or adjuster.gated(cluster_id, rejected):
            continue
        factors = adjuster.adjustments(cluster_id, rejected, extinct)
        p_tilde = adjusted_pvalues(tensor.row(cluster_id), factors)
        aggregated = aggregate(p_tilde, agg_config)
        if aggregated <= alpha:
            newly[cluster_id] = aggregated
    return newly


def successor(
    rejected: set[int],
    tensor: PValueTensor,
    screened_splits: list[ScreenedSplit],
    policy: AdjustmentPolicy,
    agg_config: AggregationConfig,
    alpha: float,
    collection: HypothesisCollection,
) -> frozenset[int]:
    """Clusters outside `rejected` whose aggregated p-value is at most alpha."""
    adjuster = _PolicyAdjuster(policy, collection, screened_splits)
    return frozenset(_rejectable(adjuster, tensor, agg_config, alpha, rejected))


def sequential_rejection(
    tensor: PValueTensor,
    screened_splits: list[ScreenedSplit],
    policy: AdjustmentPolicy,
    agg_config: AggregationConfig,
    alpha: float,
    collection: HypothesisCollection,
) -> RejectionState:
    """Iterate rejection passes to the fixpoint."""
    adjuster = _PolicyAdjuster(policy, collection, screened_splits)
    state = RejectionState()
    for iteration in range(1, len(tensor.cluster_ids) + 1):
        newly = _rejectable(adjuster, tensor, agg_config, alpha, state.rejected)
        if not newly:
            break
        for cluster_id in sorted(newly):
            state.trace.append(Rejection(iteration, cluster_id, newly[cluster_id]))
        state.rejected |= newly.keys()
    return state


def run(
    dataset: Dataset, collection: HypothesisCollection, config: RunConfig
) -> RejectionState:
    """End-to-end analysis: split, screen, test, and sequentially reject."""
    plan = make_splits(dataset.n, config.splits, config.seed)
    screened_splits, tensor = compute_pvalue_tensor(dataset, plan, collection, config)
    return sequential_rejection(
        tensor, screened_splits, config.policy, config.aggregation, config.alpha, collection
    )


def result_dict(
    state: RejectionState,
    screened_splits: list[ScreenedSplit],
    collection: HypothesisCollection,
    config: RunConfig,
) -> dict:
    """JSON-ready summary of one analysis."""
    clusters = []
    for entry in state.trace:
        members = collection.members(entry.cluster_id)
        clusters.append(
            {
                "id": entry.cluster_id,
                "members": list(members),
                "size": len(members),
                "iteration": entry.iteration,
                "pvalue": entry.p_value,
            }
        )
    return {
        "method": config.policy.kind,
        "shaffer": config.policy.shaffer,
        "alpha": config.alpha,
        "B": config.splits,
        "seed": config.seed,
        "clusters": clusters,
        "screened_sizes": [len(s.selected) for s in screened_splits],
    }
