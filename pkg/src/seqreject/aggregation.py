"""Combine per-split adjusted p-values into one multiplicity-adjusted p-value.

The combiner is an empirical-quantile rule: scale the gamma-quantile of
the adjusted p-values by 1/gamma, either at a fixed gamma or minimized
over a gamma grid with the (1 - log gamma_min) inflation that keeps the
search valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AggregationConfig",
    "adjusted_pvalues",
    "gamma_quantile",
    "aggregate_fixed",
    "aggregate_adaptive",
    "aggregate",
]

# slack absorbing float error in gamma*B before taking the ceiling
_CEIL_EPS = 1e-9


@dataclass(frozen=True)
class AggregationConfig:
    """Fixed-gamma ("fixed") or grid-search ("adaptive") aggregation."""

    mode: str = "adaptive"
    gamma: float = 0.5
    gamma_min: float = 0.05
    gamma_step: float = 0.025

    def __post_init__(self) -> None:
        if self.mode not in ("fixed", "adaptive"):
            raise ValueError(f"unknown aggregation mode {self.mode!r}")
        if self.mode == "fixed" and not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        if self.mode == "adaptive":
            if not 0.0 < self.gamma_min < 1.0:
                raise ValueError("gamma_min must be in (0, 1)")
            if self.gamma_step <= 0.0:
                raise ValueError("gamma_step must be positive")


def adjusted_pvalues(pvalues: np.ndarray, adjustments: np.ndarray) -> np.ndarray:
    """Per-split adjusted p-values min(1, p*m); an infinite m pins 1.

    The infinity rule also covers p = 0 (an infinite adjustment means the
    cluster is not currently rejectable, whatever its raw p-value).
    """
    p = np.asarray(pvalues, dtype=float)
    m = np.asarray(adjustments, dtype=float)
    out = np.ones_like(p)
    finite = np.isfinite(m)
    out[finite] = np.minimum(1.0, p[finite] * m[finite])
    return out


def _order_index(gamma: float, count: int) -> int:
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if gamma > 1.0:
        raise ValueError("gamma must be at most 1")
    return min(count, max(1, math.ceil(gamma * count - _CEIL_EPS)))


def gamma_quantile(p_tilde: np.ndarray, gamma: float) -> float:
    """The ceil(gamma*B)-th smallest value.

    This order statistic is the unique empirical quantile for which
    "quantile/gamma <= alpha" coincides with "at least a gamma-fraction
    of the values sit at or below alpha*gamma".
    """
    values = np.asarray(p_tilde, dtype=float)
    k = _order_index(gamma, values.size)
    return float(np.partition(values, k - 1)[k - 1])


def aggregate_fixed(p_tilde: np.ndarray, gamma: float) -> float:
    """min(1, gamma-quantile / gamma)."""
    return min(1.0, gamma_quantile(p_tilde, gamma) / gamma)


def gamma_grid(gamma_min: float, step: float) -> np.ndarray:
    """Grid gamma_min, gamma_min+step, ..., always including 1.0."""
    if not 0.0 < gamma_min < 1.0:
        raise ValueError("gamma_min must be in (0, 1)")
    count = int(math.floor((1.0 - gamma_min) / step + _CEIL_EPS))
    grid = gamma_min + step * np.arange(count + 1)
    grid = np.minimum(grid, 1.0)
    if grid[-1] < 1.0 - 1e-12:
        grid = np.append(grid, 1.0)
    else:
        grid[-1] = 1.0
    return grid


def aggregate_adaptive(p_tilde: np.ndarray, gamma_min: float = 0.05, step: float = 0.025) -> float:
    """Search the gamma grid for the smallest fixed-gamma aggregate.

    The minimum is inflated by (1 - log gamma_min), the price of
    searching; the grid search approximates the infimum over the open
    interval from above, which can only be conservative.
    """
    values = np.sort(np.asarray(p_tilde, dtype=float))
    grid = gamma_grid(gamma_min, step)
    best = 1.0
    for gamma in grid:
        k = _order_index(float(gamma), values.size)
        best = min(best, values[k - 1] / float(gamma))
    return min(1.0, (1.0 - math.log(gamma_min)) * best)


def aggregate(p_tilde: np.ndarray, config: AggregationConfig) -> float:
    if config.mode == "fixed":
        return aggregate_fixed(p_tilde, config.gamma)
    return aggregate_adaptive(p_tilde, config.gamma_min, config.gamma_step)
