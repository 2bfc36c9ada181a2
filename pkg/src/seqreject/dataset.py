"""Regression dataset container and strict CSV loading."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Dataset", "read_csv_dataset", "read_csv_columns"]


@dataclass(frozen=True)
class Dataset:
    """An (X, y) regression problem with optional column labels.

    Validates on construction: all entries finite, at least 4 rows and
    1 column, and no constant covariate column (zero-variance columns
    make correlation distances and standardized fits undefined).
    """

    X: np.ndarray
    y: np.ndarray
    names: tuple[str, ...] | None = field(default=None)

    def __post_init__(self) -> None:
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        n, p = X.shape
        if n < 4:
            raise ValueError(f"need at least 4 observations, got {n}")
        if p < 1:
            raise ValueError("design matrix has no columns")
        if y.shape[0] != n:
            raise ValueError(f"response length {y.shape[0]} != {n} rows of X")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("non-finite values in data")
        dead = np.flatnonzero(X.var(axis=0) == 0.0)
        if dead.size:
            raise ValueError(f"constant column: {self.column_name(int(dead[0]))}")
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != p:
                raise ValueError(f"{len(names)} names for {p} columns")
            object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def column_name(self, j: int) -> str:
        if self.names is not None:
            return self.names[j]
        return f"v{j + 1}"


def _read_csv_table(path: str) -> tuple[list[str], np.ndarray]:
    """Header plus a float matrix; missing or non-numeric cells are errors."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = list(reader)
    header = [name.strip() for name in header]
    values = np.empty((len(rows), len(header)))
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(
                f"{path}: row {i + 2} has {len(row)} fields, expected {len(header)}"
            )
        for j, cell in enumerate(row):
            cell = cell.strip()
            if not cell:
                raise ValueError(
                    f"{path}: missing value at row {i + 2}, column {header[j]!r}"
                )
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric value {cell!r} at row {i + 2}, column {header[j]!r}"
                ) from None
    return header, values


def read_csv_dataset(path: str, response: str | None = None) -> Dataset:
    """Load a Dataset from a headered CSV file.

    `response` names the response column; by default the first column is
    the response and every other column is a covariate.
    """
    header, values = _read_csv_table(path)
    if len(header) < 2:
        raise ValueError(f"{path}: need a response column and at least one covariate")
    if response is None:
        response_idx = 0
    else:
        try:
            response_idx = header.index(response)
        except ValueError:
            raise ValueError(f"{path}: no column named {response!r}") from None
    keep = [j for j in range(len(header)) if j != response_idx]
    return Dataset(
        X=values[:, keep],
        y=values[:, response_idx],
        names=tuple(header[j] for j in keep),
    )


def read_csv_columns(
    path: str, exclude: str | None = None
) -> tuple[np.ndarray, tuple[str, ...]]:
    """Load a covariate matrix from a headered CSV file.

    All columns are covariates unless `exclude` names one to drop (for
    files that carry a response column alongside the design).
    """
    header, values = _read_csv_table(path)
    keep = list(range(len(header)))
    if exclude is not None:
        try:
            keep.remove(header.index(exclude))
        except ValueError:
            raise ValueError(f"{path}: no column named {exclude!r}") from None
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: non-finite values in data")
    X = values[:, keep]
    names = tuple(header[j] for j in keep)
    dead = np.flatnonzero(X.var(axis=0) == 0.0)
    if dead.size:
        raise ValueError(f"constant column: {names[int(dead[0])]}")
    return X, names
