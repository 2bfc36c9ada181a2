from __future__ import annotations

import math

import numpy as np
import pytest

from seqreject.aggregation import (
    AggregationConfig,
    adjusted_pvalues,
    aggregate,
    aggregate_adaptive,
    aggregate_fixed,
    gamma_grid,
    gamma_quantile,
)


def test_adjusted_pvalues_basic():
    out = adjusted_pvalues(np.array([0.01, 0.5, 0.0]), np.array([10.0, 3.0, np.inf]))
    assert out == pytest.approx([0.1, 1.0, 1.0])


def test_adjusted_pvalues_infinite_overrides_zero():
    assert adjusted_pvalues(np.array([0.0]), np.array([np.inf]))[0] == 1.0


def test_gamma_quantile_is_order_statistic():
    values = np.array([0.1, 0.2, 0.3, 0.4])
    assert gamma_quantile(values, 1.0) == 0.4
    assert gamma_quantile(values, 0.5) == 0.2
    assert gamma_quantile(np.full(6, 0.37), 0.3) == 0.37


def test_gamma_quantile_sort_oracle(rng):
    for _ in range(300):
        size = int(rng.integers(1, 40))
        values = rng.random(size)
        gamma = float(rng.uniform(0.01, 1.0))
        expected = np.sort(values)[math.ceil(gamma * size - 1e-9) - 1]
        assert gamma_quantile(values, gamma) == expected


def test_gamma_quantile_float_ceiling_robust():
    # 0.3 * 10 floats to just above 3; the index must still be the 3rd value
    values = np.arange(1, 11) / 10.0
    assert gamma_quantile(values, 0.3) == 0.3


def test_gamma_quantile_invalid():
    with pytest.raises(ValueError):
        gamma_quantile(np.array([0.5]), 0.0)
    with pytest.raises(ValueError):
        gamma_quantile(np.array([0.5]), 1.5)


def test_aggregate_fixed_examples():
    assert aggregate_fixed(np.ones(6), 0.3) == 1.0
    assert aggregate_fixed(np.array([0.01, 0.02, 0.03, 0.04]), 0.5) == pytest.approx(0.04)


def test_aggregate_fixed_quantile_identity(rng):
    # "aggregate <= alpha" must coincide with "a gamma-fraction of the
    # values sits at or below alpha*gamma"
    for _ in range(2000):
        size = int(rng.integers(1, 30))
        p_tilde = rng.random(size)
        alpha = float(rng.uniform(0.001, 1.0))
        gamma = float(rng.uniform(0.02, 1.0))
        left = aggregate_fixed(p_tilde, gamma) <= alpha
        right = np.mean(p_tilde <= alpha * gamma) >= gamma - 1e-12
        assert left == right


def test_aggregate_adaptive_all_ones():
    assert aggregate_adaptive(np.ones(10)) == 1.0


def test_aggregate_adaptive_constant_closed_form():
    c = 0.05
    expected = min(1.0, (1.0 - math.log(0.05)) * c)
    assert aggregate_adaptive(np.full(50, c)) == pytest.approx(expected, abs=1e-12)
    assert aggregate_adaptive(np.full(50, 0.9)) == 1.0


def test_aggregate_adaptive_never_exceeds_one(rng):
    for _ in range(200):
        values = rng.random(int(rng.integers(1, 60)))
        assert 0.0 <= aggregate_adaptive(values) <= 1.0


def test_gamma_grid_endpoints():
    grid = gamma_grid(0.05, 0.025)
    assert grid[0] == pytest.approx(0.05)
    assert grid[-1] == 1.0
    assert len(grid) == 39
    assert np.all(np.diff(grid) > 0)


def test_monotone_in_each_coordinate(rng):
    for _ in range(300):
        size = int(rng.integers(2, 30))
        values = rng.random(size)
        bumped = values.copy()
        j = int(rng.integers(size))
        bumped[j] = min(1.0, bumped[j] + rng.uniform(0.0, 0.5))
        gamma = float(rng.uniform(0.05, 1.0))
        assert aggregate_fixed(bumped, gamma) >= aggregate_fixed(values, gamma)
        assert aggregate_adaptive(bumped) >= aggregate_adaptive(values)


def test_config_dispatch():
    values = np.array([0.01, 0.02, 0.03, 0.04])
    fixed = AggregationConfig(mode="fixed", gamma=0.5)
    assert aggregate(values, fixed) == aggregate_fixed(values, 0.5)
    adaptive = AggregationConfig()
    assert aggregate(values, adaptive) == aggregate_adaptive(values)


def test_config_validation():
    with pytest.raises(ValueError):
        AggregationConfig(mode="nope")
    with pytest.raises(ValueError):
        AggregationConfig(mode="fixed", gamma=0.0)
    with pytest.raises(ValueError):
        AggregationConfig(mode="adaptive", gamma_min=1.0)
