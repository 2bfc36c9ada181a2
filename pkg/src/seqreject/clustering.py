"""Hierarchical clustering of covariates from the design matrix alone.

Inference on the coefficients stays valid because the tree never sees
the response: distances come from column correlations only.
"""

from __future__ import annotations

import numpy as np

from .hierarchy import ClusterHierarchy, ClusterNode

__all__ = ["correlation_distance", "complete_linkage"]


def correlation_distance(X: np.ndarray) -> np.ndarray:
    """Distance matrix d_jk = 1 - |cor(x_j, x_k)|, in [0, 1] with zero diagonal."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if np.any(X.std(axis=0) == 0.0):
        raise ValueError("constant column has undefined correlation")
    if X.shape[1] == 1:
        return np.zeros((1, 1))
    corr = np.corrcoef(X, rowvar=False)
    dist = 1.0 - np.abs(corr)
    np.fill_diagonal(dist, 0.0)
    dist = np.clip(dist, 0.0, 1.0)
    return (dist + dist.T) / 2.0


def complete_linkage(D: np.ndarray) -> ClusterHierarchy:
    """Agglomerative clustering where cluster distance is the largest pairwise one.

    Ties pick the merge whose clusters have the lexicographically
    smallest (minimum member, minimum member) pair, so the merge sequence
    is reproducible across platforms. Leaf j gets node id j; merge t gets
    id p + t; merge height is the linkage distance.
    """
    D = np.asarray(D, dtype=float)
    p = D.shape[0]
    if D.ndim != 2 or D.shape[1] != p:
        raise ValueError("distance matrix must be square")
    if np.max(np.abs(D - D.T)) > 1e-8:
        raise ValueError("distance matrix must be symmetric")
    if np.any(np.diag(D) != 0.0):
        raise ValueError("distance matrix must have a zero diagonal")
    if np.any(D < 0.0):
        raise ValueError("distances must be nonnegative")
    D = (D + D.T) / 2.0

    nodes = [ClusterNode(j, (j,), None, (), 0.0) for j in range(p)]
    if p == 1:
        return ClusterHierarchy(nodes)

    # work[i, j] is the current distance between the clusters parked at
    # slots i and j; each cluster lives at the slot of its minimum member,
    # which makes the tie-break ordering equal to the slot ordering
    work = D.copy()
    np.fill_diagonal(work, np.inf)
    active = np.ones(p, dtype=bool)
    slot_node = list(range(p))  # slot -> current node id
    parents: dict[int, int] = {}

    for merge in range(p - 1):
        masked = np.where(np.outer(active, active), work, np.inf)
        best = masked.min()
        rows, cols = np.nonzero(masked == best)
        pairs = [(int(i), int(j)) for i, j in zip(rows, cols) if i < j]
        i, j = min(pairs)
        new_id = p + merge
        left, right = slot_node[i], slot_node[j]
        members = tuple(sorted(nodes[left].members + nodes[right].members))
        nodes.append(ClusterNode(new_id, members, None, (left, right), float(best)))
        parents[left] = new_id
        parents[right] = new_id
        merged = np.maximum(work[i], work[j])
        work[i, :] = merged
        work[:, i] = merged
        work[i, i] = np.inf
        active[j] = False
        slot_node[i] = new_id

    final = [
        ClusterNode(n.id, n.members, parents.get(n.id), n.children, n.height) for n in nodes
    ]
    return ClusterHierarchy(final)
