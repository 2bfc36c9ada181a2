from __future__ import annotations

import numpy as np
import pytest

from seqreject.splitting import SplitPlan, make_splits


def test_even_n_equal_halves():
    plan = make_splits(4, 3, seed=0)
    for split in plan.splits:
        assert len(split.screen_idx) == 2
        assert len(split.test_idx) == 2


def test_odd_n_testing_half_larger():
    plan = make_splits(7, 5, seed=0)
    for split in plan.splits:
        assert len(split.screen_idx) == 3
        assert len(split.test_idx) == 4


def test_partition_property():
    plan = make_splits(11, 10, seed=3)
    for split in plan.splits:
        combined = np.concatenate([split.screen_idx, split.test_idx])
        assert sorted(combined.tolist()) == list(range(11))


def test_determinism():
    a = make_splits(20, 6, seed=42)
    b = make_splits(20, 6, seed=42)
    for s, t in zip(a.splits, b.splits):
        assert np.array_equal(s.screen_idx, t.screen_idx)
        assert np.array_equal(s.test_idx, t.test_idx)


def test_prefix_stability_when_count_grows():
    short = make_splits(15, 3, seed=7)
    long = make_splits(15, 8, seed=7)
    for s, t in zip(short.splits, long.splits):
        assert np.array_equal(s.screen_idx, t.screen_idx)


def test_seed_changes_split():
    a = make_splits(30, 1, seed=1)
    b = make_splits(30, 1, seed=2)
    assert not np.array_equal(a.splits[0].screen_idx, b.splits[0].screen_idx)


def test_small_n_errors():
    with pytest.raises(ValueError):
        make_splits(3, 1, seed=0)


def test_membership_frequency():
    n, count = 10, 4000
    plan = make_splits(n, count, seed=11)
    hits = np.zeros(n)
    for split in plan.splits:
        hits[split.screen_idx] += 1
    freq = hits / count
    target = (n // 2) / n
    band = 3 * np.sqrt(target * (1 - target) / count)
    assert np.all(np.abs(freq - target) <= band)


def test_json_round_trip():
    plan = make_splits(9, 4, seed=5)
    rebuilt = SplitPlan.from_json_dict(plan.to_json_dict())
    assert rebuilt.n == plan.n and rebuilt.seed == plan.seed
    for s, t in zip(plan.splits, rebuilt.splits):
        assert np.array_equal(s.screen_idx, t.screen_idx)
        assert np.array_equal(s.test_idx, t.test_idx)
