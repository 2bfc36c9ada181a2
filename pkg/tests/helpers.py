"""Shared builders for randomized instance tests."""

from __future__ import annotations

import numpy as np

from seqreject.hierarchy import ClusterHierarchy, ClusterNode


def tree_from_merges(p: int, merges: list[tuple[int, int]]) -> ClusterHierarchy:
    """Build a hierarchy from a merge list over node ids; heights count merges."""
    members = {j: (j,) for j in range(p)}
    parents: dict[int, int] = {}
    heights = {j: 0.0 for j in range(p)}
    children: dict[int, tuple[int, ...]] = {j: () for j in range(p)}
    next_id = p
    for step, (a, b) in enumerate(merges):
        members[next_id] = tuple(sorted(members[a] + members[b]))
        heights[next_id] = float(step + 1)
        children[next_id] = (a, b)
        parents[a] = next_id
        parents[b] = next_id
        next_id += 1
    nodes = [
        ClusterNode(i, members[i], parents.get(i), children[i], heights[i])
        for i in members
    ]
    return ClusterHierarchy(nodes)


def random_binary_tree(rng: np.random.Generator, p: int) -> ClusterHierarchy:
    """Uniform random merge order over p singleton leaves."""
    alive = list(range(p))
    merges = []
    next_id = p
    while len(alive) > 1:
        i, j = sorted(rng.choice(len(alive), size=2, replace=False))
        merges.append((alive[i], alive[j]))
        alive[i] = next_id
        alive.pop(j)
        next_id += 1
    return tree_from_merges(p, merges)


def random_ancestor_closed(
    rng: np.random.Generator, tree: ClusterHierarchy, keep: float
) -> set[int]:
    """Random rejected set closed under ancestors (top-down thinning)."""
    rejected: set[int] = set()
    stack = [tree.root_id]
    while stack:
        node_id = stack.pop()
        if rng.random() < keep:
            rejected.add(node_id)
            stack.extend(tree.node(node_id).children)
    return rejected


def grow_ancestor_closed(
    rng: np.random.Generator, tree: ClusterHierarchy, base: set[int], keep: float
) -> set[int]:
    """Ancestor-closed superset of `base`."""
    grown = set(base)
    # scan top-down so a parent admitted this pass can admit its children
    order = list(reversed(tree.postorder()))
    for node_id in order:
        if node_id in grown:
            continue
        parent = tree.node(node_id).parent
        if (parent is None or parent in grown) and rng.random() < keep:
            grown.add(node_id)
    return grown


def random_screened(rng: np.random.Generator, p: int) -> frozenset[int]:
    mask = rng.random(p) < rng.uniform(0.2, 0.9)
    return frozenset(int(j) for j in np.flatnonzero(mask))
