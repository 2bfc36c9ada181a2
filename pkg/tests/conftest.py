from __future__ import annotations

import numpy as np
import pytest

from seqreject.hierarchy import ClusterHierarchy, ClusterNode


@pytest.fixture
def balanced4() -> ClusterHierarchy:
    """Two-level balanced binary tree on 4 variables.

    Leaves 0-3 (singletons), node 4 = {0,1}, node 5 = {2,3},
    node 6 = root {0,1,2,3}.
    """
    return ClusterHierarchy(
        [
            ClusterNode(0, (0,), 4, (), 0.0),
            ClusterNode(1, (1,), 4, (), 0.0),
            ClusterNode(2, (2,), 5, (), 0.0),
            ClusterNode(3, (3,), 5, (), 0.0),
            ClusterNode(4, (0, 1), 6, (0, 1), 1.0),
            ClusterNode(5, (2, 3), 6, (2, 3), 1.0),
            ClusterNode(6, (0, 1, 2, 3), None, (4, 5), 2.0),
        ]
    )


@pytest.fixture
def three_child_tree() -> ClusterHierarchy:
    """A root with three singleton children (valid, non-binary)."""
    return ClusterHierarchy(
        [
            ClusterNode(0, (0,), 3, (), 0.0),
            ClusterNode(1, (1,), 3, (), 0.0),
            ClusterNode(2, (2,), 3, (), 0.0),
            ClusterNode(3, (0, 1, 2), None, (0, 1, 2), 1.0),
        ]
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
