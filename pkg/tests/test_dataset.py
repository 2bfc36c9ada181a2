from __future__ import annotations

import numpy as np
import pytest

from seqreject.dataset import Dataset, read_csv_columns, read_csv_dataset


def test_valid_dataset(rng):
    X = rng.standard_normal((10, 3))
    ds = Dataset(X, rng.standard_normal(10), names=("a", "b", "c"))
    assert ds.n == 10 and ds.p == 3
    assert ds.column_name(1) == "b"


def test_default_column_names(rng):
    ds = Dataset(rng.standard_normal((5, 2)), rng.standard_normal(5))
    assert ds.column_name(0) == "v1"


def test_too_few_rows(rng):
    with pytest.raises(ValueError, match="at least 4"):
        Dataset(rng.standard_normal((3, 2)), rng.standard_normal(3))


def test_nan_rejected(rng):
    X = rng.standard_normal((6, 2))
    X[0, 0] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        Dataset(X, rng.standard_normal(6))


def test_constant_column_named(rng):
    X = rng.standard_normal((6, 3))
    X[:, 2] = 7.0
    with pytest.raises(ValueError, match="constant column: z"):
        Dataset(X, rng.standard_normal(6), names=("x", "y", "z"))


def test_length_mismatch(rng):
    with pytest.raises(ValueError, match="response length"):
        Dataset(rng.standard_normal((6, 2)), rng.standard_normal(5))


def _write(tmp_path, text):
    path = tmp_path / "data.csv"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_read_csv_dataset_default_response(tmp_path):
    path = _write(tmp_path, "y,a,b\n1,2,3\n4,5,6\n7,8,10\n0,1,5\n")
    ds = read_csv_dataset(path)
    assert ds.names == ("a", "b")
    assert np.allclose(ds.y, [1, 4, 7, 0])


def test_read_csv_dataset_named_response(tmp_path):
    path = _write(tmp_path, "a,y,b\n1,2,3\n4,5,6\n7,8,10\n0,1,5\n")
    ds = read_csv_dataset(path, response="y")
    assert ds.names == ("a", "b")
    assert np.allclose(ds.y, [2, 5, 8, 1])


def test_read_csv_missing_value(tmp_path):
    path = _write(tmp_path, "y,a\n1,2\n4,\n5,6\n7,8\n")
    with pytest.raises(ValueError, match="missing value"):
        read_csv_dataset(path)


def test_read_csv_non_numeric(tmp_path):
    path = _write(tmp_path, "y,a\n1,2\n4,oops\n5,6\n7,8\n")
    with pytest.raises(ValueError, match="non-numeric"):
        read_csv_dataset(path)


def test_read_csv_unknown_response(tmp_path):
    path = _write(tmp_path, "y,a\n1,2\n3,4\n5,6\n7,8\n")
    with pytest.raises(ValueError, match="no column named"):
        read_csv_dataset(path, response="nope")


def test_read_csv_columns_all_covariates(tmp_path):
    path = _write(tmp_path, "a,b,c\n1,2,3\n4,5,6\n7,8,10\n0,1,5\n")
    X, names = read_csv_columns(path)
    assert names == ("a", "b", "c")
    assert X.shape == (4, 3)


def test_read_csv_columns_exclude(tmp_path):
    path = _write(tmp_path, "y,a,b\n1,2,3\n4,5,6\n7,8,10\n0,1,5\n")
    X, names = read_csv_columns(path, exclude="y")
    assert names == ("a", "b")
    assert X.shape == (4, 2)
