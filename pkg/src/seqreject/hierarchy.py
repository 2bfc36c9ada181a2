"""Cluster trees over covariate indices and the hypothesis collections built on them.

A ClusterHierarchy is a rooted tree whose nodes are clusters (index sets)
of covariates: the root holds every index, children partition their
parent, and every leaf is a singleton. Node ids are stable integers; in
trees produced by agglomerative clustering, leaf j has id j and merge
nodes get ids p, p+1, ... in merge order.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

__all__ = [
    "ClusterNode",
    "ClusterHierarchy",
    "HypothesisCollection",
    "extinct_branches",
]

_NEWICK_RESERVED = re.compile(r"[\s(),:;\[\]']")


@dataclass(frozen=True)
class ClusterNode:
    id: int
    members: tuple[int, ...]
    parent: int | None
    children: tuple[int, ...]
    height: float


class ClusterHierarchy:
    """Immutable rooted cluster tree with set-navigation helpers."""

    def __init__(self, nodes: list[ClusterNode]):
        self._nodes = {node.id: node for node in nodes}
        if len(self._nodes) != len(nodes):
            raise ValueError("duplicate node ids")
        roots = [node.id for node in nodes if node.parent is None]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root, found {len(roots)}")
        self.root_id = roots[0]
        self._validate()
        # parent-to-root chains and descendant sets, memoized once
        self._ancestors: dict[int, tuple[int, ...]] = {}
        for node_id in self._nodes:
            chain = []
            cursor = self._nodes[node_id].parent
            while cursor is not None:
                chain.append(cursor)
                cursor = self._nodes[cursor].parent
            self._ancestors[node_id] = tuple(chain)
        self._offspring: dict[int, frozenset[int]] = {}
        for node_id in self.postorder():
            below: set[int] = set()
            for child in self._nodes[node_id].children:
                below.add(child)
                below |= self._offspring[child]
            self._offspring[node_id] = frozenset(below)

    def _validate(self) -> None:
        for node in self._nodes.values():
            for child_id in node.children:
                child = self._nodes.get(child_id)
                if child is None or child.parent != node.id:
                    raise ValueError(f"broken parent/child link at node {node.id}")
                if child.height > node.height:
                    raise ValueError(f"child {child_id} higher than parent {node.id}")
            if node.children:
                merged: list[int] = []
                for child_id in node.children:
                    merged.extend(self._nodes[child_id].members)
                if sorted(merged) != list(node.members):
                    raise ValueError(f"children of node {node.id} do not partition it")
            else:
                if len(node.members) != 1:
                    raise ValueError(f"leaf {node.id} is not a singleton")
                if node.height != 0.0:
                    raise ValueError(f"leaf {node.id} has nonzero height")
            if list(node.members) != sorted(set(node.members)):
                raise ValueError(f"members of node {node.id} not sorted/unique")
        root = self._nodes[self.root_id]
        if list(root.members) != list(range(len(root.members))):
            raise ValueError("root members must be 0..p-1")

    def postorder(self) -> list[int]:
        """Node ids with every child listed before its parent."""
        order: list[int] = []
        stack = [self.root_id]
        while stack:
            node_id = stack.pop()
            order.append(node_id)
            stack.extend(self._nodes[node_id].children)
        order.reverse()
        return order

    # -- basic access ---------------------------------------------------

    def __contains__(self, node_id: int) -> bool:
        return node_id in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def node(self, node_id: int) -> ClusterNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise KeyError(f"unknown cluster id {node_id}") from None

    def ids(self) -> list[int]:
        return sorted(self._nodes)

    def members(self, node_id: int) -> tuple[int, ...]:
        return self.node(node_id).members

    @property
    def n_variables(self) -> int:
        return len(self._nodes[self.root_id].members)

    @property
    def leaf_ids(self) -> list[int]:
        return sorted(i for i, node in self._nodes.items() if not node.children)

    @property
    def is_binary(self) -> bool:
        return all(len(n.children) in (0, 2) for n in self._nodes.values())

    # -- navigation -----------------------------------------------------

    def ancestors(self, node_id: int) -> list[int]:
        """Strict ancestors of a node, ordered parent to root."""
        self.node(node_id)
        return list(self._ancestors[node_id])

    def offspring(self, node_id: int) -> frozenset[int]:
        """All strict descendants of a node; empty for leaves."""
        self.node(node_id)
        return self._offspring[node_id]

    def siblings(self, node_id: int) -> frozenset[int]:
        """Other children of the same parent; the root has none and errors."""
        node = self.node(node_id)
        if node.parent is None:
            raise ValueError("root has no siblings")
        return frozenset(c for c in self._nodes[node.parent].children if c != node_id)

    # -- serialization --------------------------------------------------

    def to_json_dict(self) -> dict:
        def render(node_id: int) -> dict:
            node = self._nodes[node_id]
            return {
                "members": list(node.members),
                "height": node.height,
                "children": [render(c) for c in node.children],
            }

        return render(self.root_id)

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_json_dict(), **kwargs)

    @classmethod
    def from_json_dict(cls, payload: dict) -> "ClusterHierarchy":
        p = len(payload["members"])
        entries = []  # (members, height, children_entries) in postorder

        def collect(entry: dict) -> int:
            children = [collect(c) for c in entry.get("children", [])]
            entries.append((entry, children))
            return len(entries) - 1

        root_slot = collect(payload)
        ids: dict[int, int] = {}
        next_internal = p
        nodes: dict[int, ClusterNode] = {}
        for slot, (entry, child_slots) in enumerate(entries):
            members = tuple(sorted(int(m) for m in entry["members"]))
            if child_slots:
                node_id = next_internal
                next_internal += 1
            else:
                node_id = members[0]
            ids[slot] = node_id
            nodes[slot] = ClusterNode(
                node_id,
                members,
                None,  # parent filled below
                tuple(ids[c] for c in child_slots),
                float(entry["height"]),
            )
        parent_of: dict[int, int] = {}
        for slot, (entry, child_slots) in enumerate(entries):
            for c in child_slots:
                parent_of[ids[c]] = ids[slot]
        final = [
            ClusterNode(n.id, n.members, parent_of.get(n.id), n.children, n.height)
            for n in nodes.values()
        ]
        return cls(final)

    @classmethod
    def from_json(cls, text: str) -> "ClusterHierarchy":
        return cls.from_json_dict(json.loads(text))

    def to_newick(self, labels: list[str] | None = None) -> str:
        """Newick string; branch lengths are height differences to the parent."""

        def label_for(j: int) -> str:
            raw = labels[j] if labels is not None else f"v{j + 1}"
            return _NEWICK_RESERVED.sub("_", str(raw))

        def render(node_id: int, parent_height: float) -> str:
            node = self._nodes[node_id]
            length = parent_height - node.height
            if not node.children:
                return f"{label_for(node.members[0])}:{length:.17g}"
            inner = ",".join(render(c, node.height) for c in node.children)
            return f"({inner}):{length:.17g}"

        root = self._nodes[self.root_id]
        if not root.children:
            return f"{label_for(root.members[0])}:0;"
        inner = ",".join(render(c, root.height) for c in root.children)
        return f"({inner});"

    @classmethod
    def from_newick(cls, text: str, labels: list[str] | None = None) -> "ClusterHierarchy":
        """Parse a Newick string written by `to_newick`.

        Leaf names map back to indices through `labels` (sanitized the
        same way as the writer) or the default v{j+1} scheme. Heights are
        recovered from branch lengths with leaves pinned at height 0.
        """
        stripped = text.strip()
        if stripped.endswith(";"):
            stripped = stripped[:-1]

        pos = 0

        def parse() -> dict:
            nonlocal pos
            children = []
            if stripped[pos] == "(":
                pos += 1
                while True:
                    children.append(parse())
                    if pos >= len(stripped) or stripped[pos] not in ",)":
                        raise ValueError(f"malformed Newick string at offset {pos}")
                    if stripped[pos] == ",":
                        pos += 1
                        continue
                    pos += 1  # consume ")"
                    break
            start = pos
            # the label and the ":length" suffix are scanned together
            while pos < len(stripped) and stripped[pos] not in ",();":
                pos += 1
            name, _, tail = stripped[start:pos].partition(":")
            return {"name": name, "length": float(tail) if tail else 0.0, "children": children}

        parsed = parse()
        if pos != len(stripped):
            raise ValueError(f"trailing characters in Newick string at offset {pos}")

        if labels is not None:
            index_of = {_NEWICK_RESERVED.sub("_", str(s)): j for j, s in enumerate(labels)}
        else:
            index_of = None

        def leaf_index(name: str) -> int:
            if index_of is not None:
                if name not in index_of:
                    raise ValueError(f"unknown leaf label {name!r}")
                return index_of[name]
            match = re.fullmatch(r"v(\d+)", name)
            if not match:
                raise ValueError(f"cannot map leaf label {name!r} to an index")
            return int(match.group(1)) - 1

        def depth(entry: dict) -> float:
            if not entry["children"]:
                return 0.0
            return max(depth(c) + c["length"] for c in entry["children"])

        def count_leaves(entry: dict) -> int:
            if not entry["children"]:
                return 1
            return sum(count_leaves(c) for c in entry["children"])

        p = count_leaves(parsed)
        counter = {"next": p}
        nodes: list[ClusterNode] = []

        def build(entry: dict, parent: int | None, height: float) -> tuple[int, tuple[int, ...]]:
            if not entry["children"]:
                j = leaf_index(entry["name"])
                nodes.append(ClusterNode(j, (j,), parent, (), 0.0))
                return j, (j,)
            node_id = counter["next"]
            counter["next"] += 1
            child_ids = []
            members: list[int] = []
            for child in entry["children"]:
                cid, cmembers = build(child, node_id, height - child["length"])
                child_ids.append(cid)
                members.extend(cmembers)
            node = ClusterNode(node_id, tuple(sorted(members)), parent, tuple(child_ids), height)
            nodes.append(node)
            return node_id, node.members

        build(parsed, None, depth(parsed))
        return cls(nodes)


def extinct_branches(hierarchy: ClusterHierarchy, rejected: set[int]) -> frozenset[int]:
    """Rejected clusters whose strict descendants are all rejected too.

    These branches are fully resolved and no longer receive inherited
    testing weight in the inheritance adjustment.
    """
    for node_id in rejected:
        hierarchy.node(node_id)
    return frozenset(c for c in rejected if hierarchy.offspring(c) <= rejected)


class HypothesisCollection:
    """The clusters under test: all singletons, or all nodes of a tree.

    Both kinds expose the same navigation surface (singletons have no
    ancestors, offspring, or siblings) so multiplicity policies and the
    rejection engine can treat them uniformly.
    """

    def __init__(self, kind: str, p: int, tree: ClusterHierarchy | None):
        self.kind = kind
        self.p = p
        self.tree = tree

    @classmethod
    def singletons(cls, p: int) -> "HypothesisCollection":
        if p < 1:
            raise ValueError("need at least one variable")
        return cls("singletons", p, None)

    @classmethod
    def from_tree(cls, tree: ClusterHierarchy) -> "HypothesisCollection":
        return cls("tree", tree.n_variables, tree)

    @property
    def is_tree(self) -> bool:
        return self.kind == "tree"

    def ids(self) -> list[int]:
        if self.tree is not None:
            return self.tree.ids()
        return list(range(self.p))

    def members(self, cluster_id: int) -> tuple[int, ...]:
        if self.tree is not None:
            return self.tree.members(cluster_id)
        if not 0 <= cluster_id < self.p:
            raise KeyError(f"unknown cluster id {cluster_id}")
        return (cluster_id,)

    def ancestors(self, cluster_id: int) -> list[int]:
        if self.tree is not None:
            return self.tree.ancestors(cluster_id)
        self.members(cluster_id)
        return []

    def offspring(self, cluster_id: int) -> frozenset[int]:
        if self.tree is not None:
            return self.tree.offspring(cluster_id)
        self.members(cluster_id)
        return frozenset()
