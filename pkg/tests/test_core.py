import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lassoboost.core import (
    ActiveSet,
    CoefVector,
    Dataset,
    DimensionError,
    loss,
    loss_gradient,
    ls_solve,
    min_nonzero_eigenvalue,
    normalize_columns,
    standardize,
)

from conftest import make_data


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.array([[np.nan]]), np.array([1.0]))
    with pytest.raises(ValueError):
        Dataset(np.ones((2, 1)), np.array([1.0, np.inf]))
    with pytest.raises(DimensionError):
        Dataset(np.ones((2, 2)), np.ones(3))
    with pytest.raises(ValueError):
        Dataset(np.ones((2, 2)), np.ones(2), ("a", "a"))
    with pytest.raises(DimensionError):
        Dataset(np.ones((2, 2)), np.ones(2), ("a",))
    d = Dataset(np.ones((3, 2)), np.ones(3))
    assert d.column_names == ("x0", "x1") and d.n == 3 and d.p == 2


def test_active_set_invariants():
    assert ActiveSet.of([5, 2, 2]).indices == (2, 5)
    with pytest.raises(ValueError):
        ActiveSet((3, 1))
    with pytest.raises(ValueError):
        ActiveSet((-1,))
    with pytest.raises(DimensionError):
        ActiveSet((0, 4)).check_bounds(4)
    assert ActiveSet((1,)).issubset(ActiveSet((0, 1)))


def test_standardize_two_points():
    s = standardize(Dataset(np.array([[1.0], [3.0]]), np.array([0.0, 1.0])))
    assert np.allclose(s.X[:, 0], [-1, 1])
    assert s.col_means[0] == 2.0 and s.col_scales[0] == 1.0


def test_standardize_zero_column_flagged():
    X = np.column_stack([np.zeros(5), np.arange(5.0)])
    s = standardize(Dataset(X, np.arange(5.0)))
    assert s.constant.tolist() == [True, False]
    assert np.all(s.X[:, 0] == 0)
    with pytest.raises(ValueError):
        standardize(Dataset(np.ones((1, 1)), np.ones(1)))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(1, 8), st.integers(0, 10_000))
def test_standardize_invariants(n, p, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p)) * rng.uniform(0.1, 10, p) + rng.uniform(-5, 5, p)
    data = Dataset(X, rng.standard_normal(n))
    s = standardize(data)
    ok = ~s.constant
    assert np.all(np.abs(s.X.mean(axis=0)) < 1e-12)
    assert np.allclose((s.X[:, ok] ** 2).mean(axis=0), 1.0, atol=1e-12)
    b = rng.standard_normal(p)
    b[s.constant] = 0
    coef = s.destandardize(b)
    assert np.allclose(s.restandardize(coef), b, atol=1e-12)
    # predictions agree on the original scale
    assert np.allclose(coef.predict(X), s.X @ b + s.y_mean, atol=1e-10)


def test_loss_examples():
    X = np.eye(2)
    assert loss(Dataset(X, [2.0, 0.0]), np.zeros(2)) == 1.0
    assert loss(Dataset(X, [2.0, 3.0]), np.array([2.0, 3.0])) == 0.0
    assert loss(Dataset([[1.0]], [1.0]), np.array([3.0])) == 2.0
    with pytest.raises(DimensionError):
        loss(Dataset(X, [1.0, 1.0]), np.zeros(3))


def test_loss_includes_intercept():
    d = Dataset(np.array([[1.0], [2.0]]), np.array([3.0, 4.0]))
    assert loss(d, CoefVector([1.0], 2.0)) == 0.0


def test_gradient_examples():
    assert np.allclose(loss_gradient(Dataset([[1.0]], [1.0]), np.zeros(1)), [-1.0])
    d = make_data(30, 4, seed=1, beta=[1, 2, 0, 0])
    b = ls_solve(d, range(4))
    assert np.allclose(loss_gradient(d, b), 0.0, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_gradient_matches_central_differences(seed):
    s = standardize(make_data(25, 5, seed=seed, beta=[1, -1, 0.5, 0, 0])).base
    rng = np.random.default_rng(seed)
    b = rng.standard_normal(5)
    h = 1e-5
    fd = np.array([(loss(s, b + h * e) - loss(s, b - h * e)) / (2 * h) for e in np.eye(5)])
    g = loss_gradient(s, b)
    assert np.linalg.norm(fd - g) <= 1e-6 * max(1.0, np.linalg.norm(g))


def test_ls_solve_orthonormal_single():
    from conftest import orthonormal_design

    X = orthonormal_design(40, 3)
    y = np.random.default_rng(0).standard_normal(40)
    b = ls_solve(Dataset(X, y), [1])
    assert np.isclose(b.values[1], X[:, 1] @ y / 40)
    assert b.values[0] == 0 and b.values[2] == 0


def test_ls_solve_duplicate_columns_split_equally():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(20)
    y = 3 * x + 0.1 * rng.standard_normal(20)
    b = ls_solve(Dataset(np.column_stack([x, x]), y), [0, 1]).values
    assert np.isclose(b[0], b[1])
    assert np.isclose(b.sum(), x @ y / (x @ x))


def test_ls_solve_normal_equation_oracle():
    d = make_data(20, 5, seed=3, beta=[1, 2, 3, 4, 5])
    oracle = np.linalg.solve(d.X.T @ d.X, d.X.T @ d.y)
    assert np.allclose(ls_solve(d, range(5)).values, oracle, atol=1e-8)
    with pytest.raises(ValueError):
        ls_solve(d, [])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6))
def test_ls_solve_subset_stationarity(seed, k):
    d = make_data(15, 6, seed=seed, beta=np.ones(6))
    sub = list(range(k))
    r = ls_solve(d, sub)
    res = d.y - d.X @ r.values
    assert np.allclose(d.X[:, sub].T @ res, 0.0, atol=1e-8)


def test_min_nonzero_eigenvalue_examples():
    assert min_nonzero_eigenvalue(np.diag([0.0, 2.0, 5.0])) == pytest.approx(2.0)
    assert min_nonzero_eigenvalue(np.eye(4)) == pytest.approx(1.0)
    v = np.array([1.0, 1.0, 1.0])
    assert min_nonzero_eigenvalue(np.outer(v, v)) == pytest.approx(3.0)
    assert min_nonzero_eigenvalue(np.zeros((3, 3))) == 0.0
    with pytest.raises(ValueError):
        min_nonzero_eigenvalue(np.array([[1.0, 2.0], [0.0, 1.0]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_min_nonzero_eigenvalue_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((6, 4))
    M = A @ A.T
    perm = rng.permutation(6)
    assert np.isclose(min_nonzero_eigenvalue(M), min_nonzero_eigenvalue(M[np.ix_(perm, perm)]), rtol=1e-9)


def test_normalize_columns():
    d = make_data(10, 3, seed=0)
    nd, norms = normalize_columns(d)
    assert np.allclose(np.linalg.norm(nd.X, axis=0), 1.0)
    assert np.allclose(nd.X * norms, d.X)
