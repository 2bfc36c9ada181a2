"""Lasso screening on the first half sample.

The solver minimizes (1/(2m))||y - X b||^2 + lam ||b||_1 by cyclic
coordinate descent on the Gram form (1/2) b'Gb - c'b + lam ||b||_1 with
G = X'X/m and c = X'y/m. The public solver and the fit that finally
determines the screened set stop on the KKT residual; interior steps of
the cross-validation path may additionally stop when coefficients stall,
which is selection-grade accuracy at a fraction of the sweeps.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .dataset import Dataset
from .splitting import CV_STREAM, SampleSplit, split_rng

__all__ = [
    "ScreeningConfig",
    "LassoFit",
    "ScreenedSplit",
    "coordinate_descent",
    "lambda_grid",
    "cv_select_lambda",
    "screen",
]

# relative coefficient-stall threshold for interior path steps
_PATH_STALL_RTOL = 1e-8


@dataclass(frozen=True)
class ScreeningConfig:
    cv_folds: int = 10
    lambda_count: int = 100
    lambda_ratio: float = 1e-3
    cd_tol: float = 1e-7
    cd_max_iter: int = 100000


@dataclass(frozen=True)
class LassoFit:
    coefficients: np.ndarray
    lam: float
    intercept: float | None
    iterations: int
    converged: bool


@dataclass(frozen=True)
class ScreenedSplit:
    split_id: int
    screen_idx: np.ndarray
    test_idx: np.ndarray
    selected: frozenset[int]


@njit(cache=True)
def _cd_kernel(gram, linear, lam, beta, kkt_tol, stall_tol, max_sweeps):
    """Cyclic coordinate descent sweeps on the Gram form, in place.

    Stops when the KKT residual falls to `kkt_tol`, or (if `stall_tol`
    is positive) when the largest curvature-weighted squared coefficient
    move in a sweep falls to `stall_tol`. Returns (sweeps, kkt_residual).
    """
    q = linear.shape[0]
    grad = linear - gram @ beta
    sweeps = 0
    kkt = np.inf
    while sweeps < max_sweeps:
        sweeps += 1
        stall = 0.0
        for j in range(q):
            d = gram[j, j]
            if d <= 0.0:
                continue
            z = grad[j] + d * beta[j]
            if z > lam:
                new = (z - lam) / d
            elif z < -lam:
                new = (z + lam) / d
            else:
                new = 0.0
            delta = new - beta[j]
            if delta != 0.0:
                beta[j] = new
                for i in range(q):
                    grad[i] -= gram[i, j] * delta
                move = d * delta * delta
                if move > stall:
                    stall = move
        # fresh gradient removes per-sweep drift before any stop decision
        grad = linear - gram @ beta
        kkt = 0.0
        for j in range(q):
            if beta[j] > 0.0:
                violation = abs(grad[j] - lam)
            elif beta[j] < 0.0:
                violation = abs(grad[j] + lam)
            else:
                violation = abs(grad[j]) - lam
                if violation < 0.0:
                    violation = 0.0
            if violation > kkt:
                kkt = violation
        if kkt <= kkt_tol:
            break
        if stall_tol > 0.0 and stall <= stall_tol:
            break
    return sweeps, kkt


@njit(cache=True)
def _cv_fold_errors(gram, linear, grid, X_test, y_test, kkt_tol, stall_tol, max_sweeps):
    """Held-out squared prediction error at every grid penalty for one fold."""
    q = linear.shape[0]
    beta = np.zeros(q)
    errors = np.empty(grid.shape[0])
    for i in range(grid.shape[0]):
        _cd_kernel(gram, linear, grid[i], beta, kkt_tol, stall_tol, max_sweeps)
        residual = y_test - X_test @ beta
        errors[i] = residual @ residual
    return errors


@njit(cache=True)
def _warm_path_fit(gram, linear, grid, lam, kkt_tol, stall_tol, max_sweeps):
    """Walk the path down to `lam` with warm starts; the final fit at `lam`
    is run to the KKT tolerance with no stall shortcut."""
    q = linear.shape[0]
    beta = np.zeros(q)
    for i in range(grid.shape[0]):
        if grid[i] <= lam:
            break
        _cd_kernel(gram, linear, grid[i], beta, kkt_tol, stall_tol, max_sweeps)
    _, kkt = _cd_kernel(gram, linear, lam, beta, kkt_tol, 0.0, max_sweeps)
    return beta, kkt


def coordinate_descent(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    tol: float = 1e-7,
    max_iter: int = 100000,
    beta0: np.ndarray | None = None,
) -> LassoFit:
    """Solve the lasso at one penalty level.

    Expects design columns on a common scale (the screening path
    standardizes first). Convergence means the KKT residual is at most
    `tol`: active coordinates satisfy gradient = lam * sign(b) and
    inactive ones |gradient| <= lam, with the gradient x_j'(y - Xb)/m.
    `lam = 0` recovers least squares on full-rank tall designs.
    Non-convergence within `max_iter` sweeps returns the current iterate
    with converged=False and a warning.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if lam < 0.0:
        raise ValueError("penalty must be nonnegative")
    m, q = X.shape
    if y.shape[0] != m:
        raise ValueError("response length does not match rows of X")
    gram = np.ascontiguousarray(X.T @ X / m)
    linear = np.ascontiguousarray(X.T @ y / m)
    if beta0 is None:
        beta = np.zeros(q)
    else:
        beta = np.asarray(beta0, dtype=float).reshape(q).copy()
    sweeps, kkt = _cd_kernel(gram, linear, float(lam), beta, tol, 0.0, max_iter)
    converged = kkt <= tol
    if not converged:
        warnings.warn(
            f"coordinate descent did not reach tolerance {tol:g} in {max_iter} sweeps",
            stacklevel=2,
        )
    return LassoFit(
        coefficients=beta,
        lam=float(lam),
        intercept=None,
        iterations=int(sweeps),
        converged=bool(converged),
    )


def lambda_grid(
    X: np.ndarray, y: np.ndarray, count: int = 100, ratio: float = 1e-3
) -> np.ndarray:
    """Descending log-spaced penalties from lam_max down to ratio*lam_max.

    lam_max is the smallest penalty with an all-zero solution. A response
    orthogonal to every column has no usable path and errors.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if count < 1:
        raise ValueError("need at least one grid point")
    if not 0.0 < ratio <= 1.0:
        raise ValueError("ratio must be in (0, 1]")
    m = X.shape[0]
    lam_max = float(np.max(np.abs(X.T @ y)) / m)
    if lam_max == 0.0:
        raise ValueError("degenerate response: orthogonal to every column")
    if count == 1:
        return np.array([lam_max])
    exponents = np.arange(count) / (count - 1)
    return lam_max * ratio**exponents


def _path_stall_tol(y: np.ndarray) -> float:
    return _PATH_STALL_RTOL * float(np.mean(y * y))


def cv_select_lambda(
    X: np.ndarray,
    y: np.ndarray,
    folds: int = 10,
    grid: np.ndarray | None = None,
    seed: int | np.random.Generator = 0,
    tol: float = 1e-7,
    max_iter: int = 100000,
) -> float:
    """Penalty minimizing mean out-of-fold squared prediction error.

    Fits the whole descending path per fold with warm starts; ties
    resolve to the largest penalty.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    m, q = X.shape
    if not 2 <= folds <= m:
        raise ValueError(f"folds must be between 2 and {m}, got {folds}")
    if grid is None:
        grid = lambda_grid(X, y)
    rng = np.random.default_rng(seed)
    held_out = np.array_split(rng.permutation(m), folds)

    gram_total = X.T @ X
    linear_total = X.T @ y
    stall_tol = _path_stall_tol(y)
    grid = np.ascontiguousarray(np.asarray(grid, dtype=float))
    total_error = np.zeros(len(grid))
    for test in held_out:
        m_train = m - test.shape[0]
        X_test = np.ascontiguousarray(X[test])
        y_test = np.ascontiguousarray(y[test])
        gram = np.ascontiguousarray((gram_total - X_test.T @ X_test) / m_train)
        linear = np.ascontiguousarray((linear_total - X_test.T @ y_test) / m_train)
        total_error += _cv_fold_errors(
            gram, linear, grid, X_test, y_test, tol, stall_tol, max_iter
        )
    return float(grid[int(np.argmin(total_error))])


def _standardized_screen_half(
    dataset: Dataset, split: SampleSplit
) -> tuple[np.ndarray, np.ndarray]:
    rows = split.screen_idx
    X_in = dataset.X[rows]
    y_in = dataset.y[rows]
    centered = X_in - X_in.mean(axis=0)
    scale = X_in.std(axis=0)
    scale[scale == 0.0] = 1.0  # in-half constant columns become all-zero, never selected
    return centered / scale, y_in - y_in.mean()


def screen(
    dataset: Dataset,
    split: SampleSplit,
    config: ScreeningConfig = ScreeningConfig(),
    seed: int = 0,
) -> ScreenedSplit:
    """Select the screened variable set for one split.

    Standardizes the screening half, picks the penalty by k-fold
    cross-validation, refits the path on the whole half, and takes the
    support of a KKT-converged fit at the selected penalty. Supports
    larger than floor(n/2)-1 are truncated to the coefficients of
    largest magnitude (ties to the lower index), keeping the screened
    model strictly smaller than the testing half.
    """
    Xs, ys = _standardized_screen_half(dataset, split)
    m, q = Xs.shape
    empty = ScreenedSplit(split.split_id, split.screen_idx, split.test_idx, frozenset())
    if np.max(np.abs(Xs.T @ ys)) == 0.0:
        return empty
    grid = lambda_grid(Xs, ys, config.lambda_count, config.lambda_ratio)
    rng = split_rng(seed, split.split_id, CV_STREAM)
    lam = cv_select_lambda(
        Xs,
        ys,
        folds=config.cv_folds,
        grid=grid,
        seed=rng,
        tol=config.cd_tol,
        max_iter=config.cd_max_iter,
    )
    gram = np.ascontiguousarray(Xs.T @ Xs / m)
    linear = np.ascontiguousarray(Xs.T @ ys / m)
    # the fit that decides the screened set is held to the full tolerance
    beta, kkt = _warm_path_fit(
        gram,
        linear,
        np.ascontiguousarray(grid),
        float(lam),
        config.cd_tol,
        _path_stall_tol(ys),
        config.cd_max_iter,
    )
    if kkt > config.cd_tol:
        warnings.warn(
            f"screening fit did not reach tolerance {config.cd_tol:g}", stacklevel=2
        )
    support = np.flatnonzero(beta != 0.0)
    cap = dataset.n // 2 - 1
    if support.size > cap:
        order = sorted(support, key=lambda j: (-abs(beta[j]), j))
        support = np.array(sorted(order[:cap]), dtype=np.intp)
    selected = frozenset(int(j) for j in support)
    assert len(selected) < dataset.n / 2
    return ScreenedSplit(split.split_id, split.screen_idx, split.test_idx, selected)
