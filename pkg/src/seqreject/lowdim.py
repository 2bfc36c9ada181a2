"""Partial F-tests on the held-out half sample, and the F distribution CDF.

The tested null is "all screened variables inside the cluster have zero
coefficient", fit against the full screened model on the testing rows
only. Clusters that miss the screened set entirely get p-value 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dataset import Dataset
from .screening import ScreenedSplit

__all__ = [
    "PartialFResult",
    "regularized_incomplete_beta",
    "f_cdf",
    "rss",
    "partial_f_pvalue",
    "split_pvalues",
]

# relative diagonal threshold below which pivoted-QR columns are dropped
_PIVOT_RTOL = 1e-10
# full-model RSS below this fraction of ||y||^2 counts as a saturated fit
_SATURATION_RTOL = 1e-12


@dataclass(frozen=True)
class PartialFResult:
    f_stat: float
    df1: int
    df2: int
    p_value: float


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, by Lentz's algorithm."""
    max_iter = 500
    eps = 1e-16
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        numerator = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + numerator * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + numerator / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        numerator = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + numerator * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + numerator / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < eps:
            return h
    raise RuntimeError("incomplete beta continued fraction failed to converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), accurate to roughly 1e-14 absolute for moderate a, b."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("shape parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # evaluate on the side where the continued fraction converges fast
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def f_cdf(x: float, d1: int, d2: int) -> float:
    """CDF of the F(d1, d2) distribution via the incomplete beta."""
    if d1 < 1 or d2 < 1:
        raise ValueError("degrees of freedom must be at least 1")
    if x < 0.0:
        raise ValueError("F statistic must be nonnegative")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    z = d1 * x / (d1 * x + d2)
    return regularized_incomplete_beta(d1 / 2.0, d2 / 2.0, z)


def _pivoted_least_squares(X: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Residual sum of squares of y on the columns of X, rank-deficiency safe.

    Returns (rss, kept) where `kept` holds the column positions that
    survived the pivot threshold; dependent columns are dropped.
    """
    m, k = X.shape
    if k == 0:
        return float(y @ y), np.empty(0, dtype=np.intp)
    Q, R, pivots = scipy.linalg.qr(X, mode="economic", pivoting=True, check_finite=False)
    diag = np.abs(np.diag(R))
    threshold = _PIVOT_RTOL * np.linalg.norm(X)
    rank = int(np.sum(diag > threshold))
    if rank == 0:
        return float(y @ y), np.empty(0, dtype=np.intp)
    kept = np.sort(pivots[:rank])
    coef = scipy.linalg.solve_triangular(
        R[:rank, :rank], Q[:, :rank].T @ y, check_finite=False
    )
    residual = y - X[:, pivots[:rank]] @ coef
    return float(residual @ residual), kept


def rss(X: np.ndarray, y: np.ndarray) -> float:
    """Least-squares residual sum of squares, ||y - X b||^2.

    Uses rank-revealing QR; columns that fall below the pivot threshold
    are dropped rather than producing an unstable solve. Requires more
    rows than columns.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    m, k = X.shape
    if y.shape[0] != m:
        raise ValueError("response length does not match rows of X")
    if m <= k:
        raise ValueError(f"need more rows than columns, got {m} x {k}")
    value, _ = _pivoted_least_squares(X, y)
    return value


def split_pvalues(
    dataset: Dataset,
    split: ScreenedSplit,
    clusters: list[tuple[int, ...]],
    intercept: bool = False,
) -> list[PartialFResult | float]:
    """Partial F-test results for several clusters on one screened split.

    Shares the full-model fit across clusters. Returns, per cluster,
    either a PartialFResult or the bare p-value 1.0 when the cluster has
    no screened variables to test.
    """
    test_rows = split.test_idx
    y_out = dataset.y[test_rows]
    m = test_rows.shape[0]
    screened = sorted(split.selected)
    if not screened:
        return [1.0] * len(clusters)

    columns = [dataset.X[test_rows][:, j] for j in screened]
    if intercept:
        columns.append(np.ones(m))
    X_full = np.column_stack(columns)
    if m <= X_full.shape[1]:
        raise ValueError(
            f"screened model has {X_full.shape[1]} columns for {m} testing rows"
        )

    rss_full, kept = _pivoted_least_squares(X_full, y_out)
    kept_set = set(int(i) for i in kept)
    df2 = m - len(kept_set)
    y_norm2 = float(y_out @ y_out)
    saturated = rss_full < _SATURATION_RTOL * y_norm2
    if saturated:
        warnings.warn(
            "saturated screened fit on the testing half; p-values floored at 0",
            stacklevel=2,
        )
    position = {j: pos for pos, j in enumerate(screened)}

    results: list[PartialFResult | float] = []
    for members in clusters:
        tested = [position[j] for j in members if j in position and position[j] in kept_set]
        q = len(tested)
        if q == 0:
            results.append(1.0)
            continue
        if saturated:
            results.append(PartialFResult(math.inf, q, df2, 0.0))
            continue
        restricted = sorted(kept_set - set(tested))
        rss_restricted, _ = _pivoted_least_squares(X_full[:, restricted], y_out)
        f_stat = max(0.0, (rss_restricted - rss_full) / q / (rss_full / df2))
        results.append(PartialFResult(f_stat, q, df2, 1.0 - f_cdf(f_stat, q, df2)))
    return results


def partial_f_pvalue(
    dataset: Dataset,
    split: ScreenedSplit,
    members: tuple[int, ...],
    intercept: bool = False,
) -> PartialFResult | float:
    """Partial F-test of one cluster's screened variables on the testing rows.

    Drops the cluster's screened columns from the full screened model and
    compares residual sums of squares. Returns 1.0 outright when the
    cluster contains no screened variable.
    """
    return split_pvalues(dataset, split, [tuple(members)], intercept)[0]
