import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import mean_std_two_pass, pearson_direct
from pcax.errors import DataError
from pcax.stats import (
    DataMatrix,
    center,
    correlation_raw,
    covariance_matrix,
    pearson,
    standardize,
    summarize,
)


def dm(rows, names=None):
    return DataMatrix.from_rows(rows, names)


def test_datamatrix_invariants():
    with pytest.raises(DataError):
        dm([[1.0]])
    with pytest.raises(DataError):
        dm([[1.0, 2.0], [3.0, 4.0]], ["a", "a"])
    with pytest.raises(DataError):
        dm([[1.0, np.inf]])
    x = dm([[1.0, 2.0, 3.0]])
    assert x.feature_names == ("x1",) and x.n_objects == 3
    with pytest.raises(ValueError):
        x.values[0, 0] = 9.0


def test_from_objects_transposes():
    x = DataMatrix.from_objects([[1, 10], [2, 20], [3, 30]], ["a", "b"])
    np.testing.assert_array_equal(x.values, [[1, 2, 3], [10, 20, 30]])


def test_select_by_name():
    x = dm([[1, 2], [3, 4], [5, 6]], ["a", "b", "c"])
    assert x.select(["c", "a"]).values.tolist() == [[5, 6], [1, 2]]
    with pytest.raises(DataError):
        x.select(["z"])


def test_summarize_hand_cases():
    s = summarize(dm([[1.0, 2.0, 3.0], [5.0, 5.0, 5.0]]))
    np.testing.assert_array_equal(s.means, [2.0, 5.0])
    np.testing.assert_array_equal(s.stds, [1.0, 0.0])


def test_summarize_matches_two_pass():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((4, 50)) * 3 + 7
    s = summarize(dm(x))
    for i, row in enumerate(x):
        mu, sd = mean_std_two_pass(row)
        assert abs(s.means[i] - mu) <= 1e-12 * max(1, abs(mu))
        assert abs(s.stds[i] - sd) <= 1e-12 * max(1, sd)


def test_center():
    assert center(dm([[1.0, 2.0, 3.0]])).values.tolist() == [[-1.0, 0.0, 1.0]]
    rng = np.random.default_rng(1)
    c = center(dm(rng.standard_normal((3, 40)) + 100))
    assert np.abs(c.values.mean(axis=1)).max() <= 1e-12
    np.testing.assert_allclose(center(c).values, c.values, atol=1e-12)


def test_standardize_two_points():
    z, s, kept = standardize(dm([[0.0, 2.0]]))
    assert s.means[0] == 1.0 and s.stds[0] == pytest.approx(math.sqrt(2))
    np.testing.assert_allclose(z.values, [[-1 / math.sqrt(2), 1 / math.sqrt(2)]])
    assert kept == ["x1"]


def test_standardize_zero_variance_policies():
    x = dm([[1.0, 2.0, 4.0], [3.0, 3.0, 3.0]], ["a", "const"])
    z, s, kept = standardize(x, "drop")
    assert kept == ["a"] and z.feature_names == ("a",)
    with pytest.raises(DataError):
        standardize(x, "error")
    with pytest.raises(DataError):
        standardize(dm([[2.0, 2.0]]), "drop")
    with pytest.raises(ValueError):
        standardize(x, "ignore")


def test_standardize_detects_roundoff_constant():
    # 0.1 is not exact in binary, so the centered row is not exactly zero
    z, _, kept = standardize(dm([[0.1] * 7, [1.0, 2, 3, 4, 5, 6, 7]], ["c", "v"]))
    assert kept == ["v"]


def test_covariance_hand_cases():
    k = covariance_matrix(dm([[-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]]))
    np.testing.assert_array_equal(k, [[1.0, 1.0], [1.0, 1.0]])
    k = covariance_matrix(dm([[-1.0, 1.0, -1.0, 1.0], [-1.0, -1.0, 1.0, 1.0]]))
    assert abs(k[0, 1]) <= 1e-12
    assert covariance_matrix(dm([[-1.0, 0.0, 1.0]])).tolist() == [[1.0]]


def test_covariance_requires_centered():
    with pytest.raises(DataError):
        covariance_matrix(dm([[1.0, 2.0, 3.0]]))


def test_pearson_cases():
    x = [1.0, 2.0, 3.0, 4.0]
    assert pearson(x, x) == pytest.approx(1.0, abs=1e-15)
    assert pearson(x, [-v for v in x]) == pytest.approx(-1.0, abs=1e-15)
    assert pearson(x, [1.0, 3.0, 2.0, 4.0]) == pytest.approx(0.8, abs=1e-15)
    with pytest.raises(DataError):
        pearson(x, [2.0] * 4)
    with pytest.raises(DataError):
        pearson(x, [1.0, 2.0])


def test_correlation_raw_cases():
    assert correlation_raw([1, 1], [1, 1]) == 1.0
    assert correlation_raw([3, -2, 7], [0, 0, 0]) == 0.0
    assert correlation_raw([1, 2], [3, 4]) == 5.5
    with pytest.raises(DataError):
        correlation_raw([1, 2], [1])


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=80, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 5), st.integers(3, 30)), elements=finite))
def test_standardize_properties(values):
    x = dm(values)
    spread = values.std(axis=1)
    # skip rows so flat that their standardization is dominated by roundoff
    if np.any((spread > 0) & (spread < 1e-6 * np.maximum(1, np.abs(values).max(axis=1)))):
        return
    if np.all(spread == 0):
        with pytest.raises(DataError):
            standardize(x)
        return
    z, _, kept = standardize(x)
    np.testing.assert_allclose(z.values.mean(axis=1), 0.0, atol=1e-10)
    np.testing.assert_allclose(z.values.std(axis=1, ddof=1), 1.0, atol=1e-10)
    again, _, _ = standardize(z)
    np.testing.assert_allclose(again.values, z.values, atol=1e-10)
    k = covariance_matrix(z)
    for i in range(len(kept)):
        for j in range(len(kept)):
            if not (np.ptp(z.values[i]) and np.ptp(z.values[j])):
                continue
            assert abs(k[i, j] - pearson_direct(list(z.values[i]), list(z.values[j]))) <= 1e-10


@settings(max_examples=80, deadline=None)
@given(st.lists(finite, min_size=2, max_size=40), st.integers(0, 2**32 - 1))
def test_pearson_bounded(xs, seed):
    ys = np.random.default_rng(seed).permutation(xs)
    try:
        r = pearson(xs, ys)
    except DataError:
        return
    assert -1.0 <= r <= 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-1e3, 1e3))
def test_covariance_shift_invariant(seed, shift):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((3, 25))
    shifted = v.copy()
    shifted[1] += shift
    np.testing.assert_allclose(covariance_matrix(center(dm(shifted))),
                               covariance_matrix(center(dm(v))), atol=1e-9)
