import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lassoboost.boosting import BoostConfig, forward_stagewise, ls_boost
from lassoboost.core import Dataset, standardize
from lassoboost.diagnostics import (
    eigen_curve,
    family_losses,
    fs_bound_terms,
    fs_bound_value,
    gamma,
    gamma_on_active_set,
    isotonic_deviation,
    prediction_bound_terms,
    rate_check,
)
from lassoboost.twostage import FitSettings

from conftest import make_data

FIXED = dict(stop_rule="fixed")


def test_gamma_examples():
    assert gamma(0.01, 2.0, 4) == pytest.approx(0.9975125, abs=1e-15)
    assert gamma(0.5, 0.0, 3) == 1.0
    for bad in ((0.0, 1.0, 1), (1.0, 1.0, 1), (0.5, -1.0, 1), (0.5, 1.0, 0)):
        with pytest.raises(ValueError):
            gamma(*bad)


def test_gamma_on_active_set_scalings():
    rng = np.random.default_rng(0)
    n = 30
    s = standardize(Dataset(rng.standard_normal((n, 4)), rng.standard_normal(n)))
    # standardized singleton: raw Gram is <x, x> = n
    assert gamma_on_active_set(s, [2], 0.5) == pytest.approx(1 - 0.75 * n / 4)
    assert gamma_on_active_set(s, [2], 0.5, "per_n") == pytest.approx(1 - 0.75 / 4)
    assert gamma_on_active_set(s, [2], 0.5, "unit") == pytest.approx(1 - 0.75 / 4)
    lam = np.linalg.eigvalsh(s.X.T @ s.X).min()
    assert gamma_on_active_set(s, range(4), 0.1) == pytest.approx(gamma(0.1, lam, 4))
    with pytest.raises(ValueError):
        gamma_on_active_set(s, [], 0.1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12))
def test_interlacing_and_nested_gamma(seed, size):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((20, 12))
    cols = rng.permutation(12)
    A, B = np.sort(cols[: size - 1]), np.sort(cols[:size])
    lam = [np.linalg.eigh(X[:, c].T @ X[:, c])[0][0] for c in (A, B)]
    assert lam[0] >= lam[1] - 1e-10
    d = Dataset(X, np.zeros(20))
    for scaling in ("raw", "per_n", "unit"):
        assert gamma_on_active_set(d, A, 0.1, scaling) <= gamma_on_active_set(d, B, 0.1, scaling) + 1e-12


def test_unit_scaled_gamma_in_range():
    rng = np.random.default_rng(1)
    for _ in range(20):
        X = rng.standard_normal((40, 8)) @ rng.standard_normal((8, 8))
        g = gamma_on_active_set(Dataset(X, np.zeros(40)), range(8), 0.99, "unit")
        assert 0.75 <= g < 1


def test_eigen_curve_small():
    curve = eigen_curve(50, 0.0, [1, 2, 5, 10], replications=5, seed=3)
    assert curve.lambda_mean[0] == pytest.approx(50)
    assert np.all(np.diff(curve.lambda_mean) <= 0)
    assert np.all(np.diff(curve.gamma_mean) >= 0)
    unit = eigen_curve(50, 0.35, [2, 4, 8], replications=5, seed=3, scaling="unit", subsets="random")
    assert np.all((unit.gamma_all >= 0.75) & (unit.gamma_all < 1))
    assert len(curve.rows()) == 4
    with pytest.raises(ValueError):
        eigen_curve(50, 0.0, [3, 2])


def test_eigen_curve_is_seeded():
    a = eigen_curve(30, 0.35, [2, 4], replications=3, seed=9)
    b = eigen_curve(30, 0.35, [2, 4], replications=3, seed=9)
    assert np.array_equal(a.gamma_all, b.gamma_all)


def test_isotonic_deviation():
    assert isotonic_deviation([1, 2, 3]) == 0.0
    assert isotonic_deviation([3, 2, 1], increasing=False) == 0.0
    assert isotonic_deviation([1.0, 3.0, 2.0]) == pytest.approx(0.5 / 2.0)


def _instance(seed, noise=1.0, n=50, p=5):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p)) * rng.uniform(0.5, 3, p)
    beta = np.zeros(p)
    beta[:3] = rng.uniform(-2, 2, 3)
    y = X @ beta + noise * rng.standard_normal(n)
    return Dataset(X, y), beta


@pytest.mark.parametrize("seed", range(5))
def test_prediction_bound_holds(seed, backend):
    data, beta = _instance(seed)
    path = ls_boost(data, range(5), BoostConfig(0.1, max_iter=500, **FIXED))
    trace = prediction_bound_terms(data, beta, path)
    assert trace.holds()
    assert trace.lhs[0] == pytest.approx(np.linalg.norm(data.X @ beta))
    assert 0.75 <= trace.gamma < 1


def test_zero_noise_removes_offset():
    data, beta = _instance(7, noise=0.0)
    path = ls_boost(data, range(5), BoostConfig(0.2, max_iter=300, **FIXED))
    trace = prediction_bound_terms(data, beta, path)
    assert trace.offset < 1e-6
    assert trace.holds()


def test_bound_requires_support_in_subset():
    data, beta = _instance(0)
    path = ls_boost(data, [0, 1], BoostConfig(0.1, max_iter=10, **FIXED))
    with pytest.raises(ValueError):
        prediction_bound_terms(data, beta, path)


def test_fs_bound_examples(backend):
    data, beta = _instance(2)
    path = forward_stagewise(data, range(5), BoostConfig(0.01, max_iter=500, **FIXED))
    res = fs_bound_terms(data, beta, path, 500)
    assert res.witness >= 0
    zero = Dataset(data.X, np.zeros(50))
    zp = forward_stagewise(zero, range(5), BoostConfig(0.01, max_iter=10, **FIXED))
    assert fs_bound_terms(zero, np.zeros(5), zp, 10).witness == 0
    vals = [fs_bound_value(4.0, 0.5, 5, 0.01, k, 0.3) for k in (1, 10, 100)]
    assert vals[0] > vals[1] > vals[2]
    assert fs_bound_value(4.0, 0.0, 5, 0.01, 1, 0.0) == np.inf


def test_rate_check_and_family_losses():
    rows = rate_check([40, 80], "relaxed_lasso", replications=2,
                      settings=FitSettings(lambda_count=10, relax_weights=5))
    assert [r.n for r in rows] == [40, 80]
    assert all(r.scaled_loss > 0 and r.scaled_gap >= 0 for r in rows)
    from lassoboost.twostage import fit_families

    data = make_data(30, 3, seed=0, beta=[1, 0, 0])
    fam = fit_families(standardize(data), ("lasso",), FitSettings(lambda_count=5))["lasso"]
    L = family_losses(fam, data)
    assert L.shape == (5,) and L[0] == pytest.approx(np.var(data.y) / 2)
