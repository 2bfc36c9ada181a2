"""Multiplicity adjustment policies for the sequential rejection loop.

Each policy maps (cluster, currently rejected set, screened set) to a
factor in [1, inf] that multiplies the cluster's raw p-value on one
split. Policies may shrink as rejections accumulate, which is what makes
the loop sequential; infinity marks clusters that cannot be rejected yet
(hierarchical policies gate children until every ancestor is rejected).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .hierarchy import ClusterHierarchy, HypothesisCollection, extinct_branches

__all__ = [
    "POLICY_KINDS",
    "AdjustmentPolicy",
    "bonferroni_adjustment",
    "holm_adjustment",
    "hier_bonferroni_adjustment",
    "inheritance_adjustment",
    "binary_shaffer_factor",
    "adjust",
    "screened_weights",
]

POLICY_KINDS = ("single-bonf", "single-holm", "hier-bonf", "hier-inherit")

INF = math.inf


@dataclass(frozen=True)
class AdjustmentPolicy:
    """One of the four adjustment rules, optionally Shaffer-multiplied."""

    kind: str
    shaffer: bool = False

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.shaffer and self.kind != "hier-inherit":
            raise ValueError(
                "the sibling-factor improvement is only defined for the "
                "inheritance policy on binary trees"
            )

    @property
    def needs_tree(self) -> bool:
        return self.kind in ("hier-bonf", "hier-inherit")


def screened_weights(tree: ClusterHierarchy, screened: Iterable[int]) -> dict[int, int]:
    """Number of screened variables inside every cluster of the tree."""
    screened_set = frozenset(screened)
    weights: dict[int, int] = {}
    for node_id in tree.postorder():
        node = tree.node(node_id)
        if node.children:
            weights[node_id] = sum(weights[c] for c in node.children)
        else:
            weights[node_id] = 1 if node.members[0] in screened_set else 0
    return weights


def bonferroni_adjustment(rejected: set[int], screened: frozenset[int]) -> float:
    """Size of the screened set, regardless of previous rejections."""
    return float(len(screened)) if screened else INF


def holm_adjustment(rejected: set[int], screened: frozenset[int]) -> float:
    """Number of screened variables whose singleton is still unrejected.

    Floored at 1 so the adjustment stays a valid multiplier even in the
    vacuous corner where everything screened is already rejected.
    """
    count = sum(1 for j in screened if j not in rejected)
    return float(max(1, count))


def _check_ancestor_closed(tree: ClusterHierarchy, rejected: set[int]) -> None:
    for node_id in rejected:
        if not set(tree.ancestors(node_id)) <= rejected:
            raise ValueError(
                f"rejected set is not ancestor-closed at cluster {node_id}"
            )


def _hier_bonferroni_from_weights(
    cluster_id: int,
    rejected: set[int],
    weights: Mapping[int, int],
    total: int,
    tree: ClusterHierarchy,
) -> float:
    if not set(tree.ancestors(cluster_id)) <= rejected:
        return INF
    overlap = weights[cluster_id]
    if overlap == 0:
        return 1.0
    return total / overlap


def _inheritance_from_weights(
    cluster_id: int,
    rejected: set[int],
    weights: Mapping[int, int],
    total: int,
    tree: ClusterHierarchy,
    extinct: frozenset[int],
) -> float:
    ancestors = tree.ancestors(cluster_id)
    if not set(ancestors) <= rejected:
        return INF
    overlap = weights[cluster_id]
    if overlap == 0:
        return 1.0
    factor = total / overlap
    for ancestor in ancestors:
        surviving = sum(
            weights[child]
            for child in tree.node(ancestor).children
            if child not in extinct
        )
        if surviving == 0:
            # no screened mass left to inherit; treat as unrejectable
            return INF
        factor *= surviving / weights[ancestor]
    return factor


def _shaffer_from_weights(
    cluster_id: int,
    rejected: set[int],
    weights: Mapping[int, int],
    tree: ClusterHierarchy,
) -> float:
    if cluster_id == tree.root_id or cluster_id in rejected:
        return 1.0
    siblings = tree.siblings(cluster_id)
    # the factor applies only when every sibling is an unrejected leaf
    for sibling in siblings:
        if tree.node(sibling).children or sibling in rejected:
            return 1.0
    own = weights[cluster_id]
    denominator = own + sum(weights[s] for s in siblings)
    if denominator == 0:
        return 1.0
    return own / denominator


def hier_bonferroni_adjustment(
    cluster_id: int,
    rejected: set[int],
    screened: frozenset[int],
    tree: ClusterHierarchy,
) -> float:
    """Screened-set size over the cluster's screened count, gated by ancestors.

    Infinite until every ancestor is rejected; 1 when the cluster holds
    no screened variable (its p-values are 1 anyway).
    """
    weights = screened_weights(tree, screened)
    return _hier_bonferroni_from_weights(
        cluster_id, rejected, weights, len(screened), tree
    )


def inheritance_adjustment(
    cluster_id: int,
    rejected: set[int],
    screened: frozenset[int],
    tree: ClusterHierarchy,
) -> float:
    """Hierarchical adjustment that inherits weight from extinct branches.

    Each rejected ancestor contributes the fraction of its screened
    variables still sitting in non-extinct children, which never exceeds
    one, so this improves on the plain hierarchical adjustment uniformly.
    Requires an ancestor-closed rejected set.
    """
    _check_ancestor_closed(tree, rejected)
    weights = screened_weights(tree, screened)
    extinct = extinct_branches(tree, rejected)
    return _inheritance_from_weights(
        cluster_id, rejected, weights, len(screened), tree, extinct
    )


def binary_shaffer_factor(
    cluster_id: int,
    rejected: set[int],
    screened: frozenset[int],
    tree: ClusterHierarchy,
) -> float:
    """Logical-constraint multiplier in (0, 1] for binary trees.

    When a cluster's sibling is an unrejected leaf, the sibling cannot be
    the only false null under it, so the cluster's share of the screened
    weight shrinks the adjustment. Everywhere else the factor is 1.
    """
    if not tree.is_binary:
        raise ValueError("sibling factor requires a binary tree")
    weights = screened_weights(tree, screened)
    return _shaffer_from_weights(cluster_id, rejected, weights, tree)


def adjust(
    policy: AdjustmentPolicy,
    cluster_id: int,
    rejected: set[int],
    screened: frozenset[int],
    collection: HypothesisCollection,
) -> float:
    """Evaluate a policy's adjustment for one cluster.

    Errors when the policy kind does not match the collection kind, or
    when the sibling factor is requested off a binary tree.
    """
    if policy.needs_tree:
        if not collection.is_tree or collection.tree is None:
            raise ValueError(f"{policy.kind} requires a tree collection")
        tree = collection.tree
        if policy.kind == "hier-bonf":
            base = hier_bonferroni_adjustment(cluster_id, rejected, screened, tree)
        else:
            base = inheritance_adjustment(cluster_id, rejected, screened, tree)
        if policy.shaffer:
            base *= binary_shaffer_factor(cluster_id, rejected, screened, tree)
        return base
    if collection.is_tree:
        raise ValueError(f"{policy.kind} requires the singleton collection")
    collection.members(cluster_id)
    if policy.kind == "single-bonf":
        return bonferroni_adjustment(rejected, screened)
    return holm_adjustment(rejected, screened)
