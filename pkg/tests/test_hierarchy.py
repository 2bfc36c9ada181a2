from __future__ import annotations

import json

import numpy as np
import pytest

from seqreject.hierarchy import (
    ClusterHierarchy,
    ClusterNode,
    HypothesisCollection,
    extinct_branches,
)

from helpers import random_binary_tree, random_ancestor_closed, grow_ancestor_closed


def test_ancestors_of_root_is_empty(balanced4):
    assert balanced4.ancestors(6) == []


def test_ancestors_of_leaf_parent_to_root(balanced4):
    chain = balanced4.ancestors(0)
    assert [balanced4.members(i) for i in chain] == [(0, 1), (0, 1, 2, 3)]


def test_ancestors_unknown_id_errors(balanced4):
    with pytest.raises(KeyError):
        balanced4.ancestors(99)


def test_singleton_collection_has_no_ancestors():
    collection = HypothesisCollection.singletons(5)
    assert all(collection.ancestors(i) == [] for i in collection.ids())
    assert all(collection.offspring(i) == frozenset() for i in collection.ids())


def test_offspring_of_leaf_empty(balanced4):
    assert balanced4.offspring(2) == frozenset()


def test_offspring_of_root_is_everything_else(balanced4):
    assert balanced4.offspring(6) == frozenset({0, 1, 2, 3, 4, 5})
    assert len(balanced4.offspring(6)) == 6


def test_offspring_of_internal_node(balanced4):
    assert balanced4.offspring(4) == frozenset({0, 1})


def test_siblings_binary(balanced4):
    assert balanced4.siblings(0) == frozenset({1})
    assert balanced4.siblings(4) == frozenset({5})


def test_siblings_three_children(three_child_tree):
    assert three_child_tree.siblings(1) == frozenset({0, 2})


def test_siblings_of_root_errors(balanced4):
    with pytest.raises(ValueError):
        balanced4.siblings(6)


def test_extinct_branches_empty_and_full(balanced4):
    assert extinct_branches(balanced4, set()) == frozenset()
    everything = set(balanced4.ids())
    assert extinct_branches(balanced4, everything) == frozenset(everything)


def test_extinct_branches_partial(balanced4):
    # {0,1} is not extinct while leaf 1 survives; the root is not extinct
    # while the {2,3} side survives
    assert extinct_branches(balanced4, {6, 4, 0}) == frozenset({0})


def test_extinct_branches_monotone(rng):
    for _ in range(1000):
        p = int(rng.integers(2, 12))
        tree = random_binary_tree(rng, p)
        small = random_ancestor_closed(rng, tree, keep=0.6)
        # monotonicity holds for arbitrary supersets, not only closed ones
        extra = {i for i in tree.ids() if rng.random() < 0.2}
        large = small | extra
        assert extinct_branches(tree, small) <= extinct_branches(tree, large)


def test_partition_and_disjointness_on_random_trees(rng):
    for _ in range(50):
        tree = random_binary_tree(rng, int(rng.integers(2, 16)))
        for node_id in tree.ids():
            node = tree.node(node_id)
            if node.children:
                merged = sorted(
                    m for child in node.children for m in tree.members(child)
                )
                assert merged == list(node.members)
            below = tree.offspring(node_id)
            above = set(tree.ancestors(node_id))
            assert not below & above
            assert node_id not in below and node_id not in above


def test_invalid_trees_rejected():
    with pytest.raises(ValueError):
        ClusterHierarchy([])  # no root
    with pytest.raises(ValueError):
        # leaf with two members
        ClusterHierarchy([ClusterNode(0, (0, 1), None, (), 0.0)])
    with pytest.raises(ValueError):
        # child above parent
        ClusterHierarchy(
            [
                ClusterNode(0, (0,), 2, (), 0.0),
                ClusterNode(1, (1,), 2, (), 0.0),
                ClusterNode(2, (0, 1), None, (0, 1), -1.0),
            ]
        )


def test_json_round_trip(balanced4):
    text = balanced4.to_json()
    rebuilt = ClusterHierarchy.from_json(text)
    assert rebuilt.ids() == balanced4.ids()
    for node_id in balanced4.ids():
        assert rebuilt.members(node_id) == balanced4.members(node_id)
        assert rebuilt.node(node_id).height == balanced4.node(node_id).height
    assert json.loads(text)["members"] == [0, 1, 2, 3]


def test_newick_round_trip_default_labels(balanced4):
    text = balanced4.to_newick()
    rebuilt = ClusterHierarchy.from_newick(text)
    pairs = {(rebuilt.members(i), rebuilt.node(i).height) for i in rebuilt.ids()}
    expected = {(balanced4.members(i), balanced4.node(i).height) for i in balanced4.ids()}
    assert pairs == expected


def test_newick_round_trip_sanitized_labels(balanced4):
    labels = ["gene a", "gene(b)", "gene:c", "gene,d"]
    text = balanced4.to_newick(labels)
    rebuilt = ClusterHierarchy.from_newick(text, labels)
    assert rebuilt.members(rebuilt.root_id) == (0, 1, 2, 3)


def test_newick_round_trip_random_trees(rng):
    for _ in range(20):
        tree = random_binary_tree(rng, int(rng.integers(2, 10)))
        rebuilt = ClusterHierarchy.from_newick(tree.to_newick())
        pairs = sorted((rebuilt.members(i), rebuilt.node(i).height) for i in rebuilt.ids())
        expected = sorted((tree.members(i), tree.node(i).height) for i in tree.ids())
        assert pairs == pytest.approx(expected) or pairs == expected
        for got, want in zip(pairs, expected):
            assert got[0] == want[0]
            assert got[1] == pytest.approx(want[1], abs=1e-12)


def test_collection_kinds(balanced4):
    singles = HypothesisCollection.singletons(4)
    assert singles.ids() == [0, 1, 2, 3]
    assert [singles.members(i) for i in singles.ids()] == [(0,), (1,), (2,), (3,)]
    tree = HypothesisCollection.from_tree(balanced4)
    assert tree.ids() == balanced4.ids()
    assert tree.members(4) == (0, 1)
    with pytest.raises(KeyError):
        singles.members(11)
