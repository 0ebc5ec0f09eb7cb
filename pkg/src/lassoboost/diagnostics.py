"""Convergence-rate quantities for boosting and empirical audits of the bounds.

The linear rate ``gamma = 1 - eps(2 - eps) lambda_pmin / (4p)`` lies in
[0.75, 1) when the Gram matrix has unit diagonal (columns of unit Euclidean
norm), because ``lambda_pmin <= trace / p = 1``.  The bound audits therefore
work on column-normalized copies of the data.  LS-boost fitted values do
not depend on column scaling, so the audited quantities are those of the
original run.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import isotonic_regression

from .core import ActiveSet, Dataset, loss_gradient, ls_solve, min_nonzero_eigenvalue, normalize_columns, standardize
from .simulation import SimConfig, draw_dataset, make_sigma
from .twostage import FitSettings, fit_families


def gamma(epsilon: float, lambda_pmin: float, p: int) -> float:
    """Linear convergence rate ``1 - eps(2 - eps) lambda_pmin / (4p)``.

    Returned unclipped: values outside [0.75, 1) signal that the Gram matrix
    does not have unit diagonal, or (value 1) a zero eigenvalue.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if lambda_pmin < 0:
        raise ValueError("lambda_pmin must be nonnegative")
    if p < 1:
        raise ValueError("p must be >= 1")
    return 1.0 - epsilon * (2.0 - epsilon) * lambda_pmin / (4.0 * p)


def _gram(X, scaling):
    if scaling == "raw":
        return X.T @ X
    if scaling == "per_n":
        return X.T @ X / X.shape[0]
    if scaling == "unit":
        Xn = X / np.linalg.norm(X, axis=0)
        return Xn.T @ Xn
    raise ValueError("scaling must be 'raw', 'per_n' or 'unit'")


def gamma_on_active_set(data, subset, epsilon: float, scaling: str = "raw") -> float:
    """:func:`gamma` for the columns in ``subset``.

    ``scaling`` chooses the Gram matrix: ``raw`` is ``X_A'X_A`` as given,
    ``per_n`` divides it by n and ``unit`` first normalizes each column to
    unit length.
    """
    if not isinstance(subset, ActiveSet):
        subset = ActiveSet.of(subset)
    if subset.size == 0:
        raise ValueError("empty subset")
    X = data.X[:, subset.as_array()]
    return gamma(epsilon, min_nonzero_eigenvalue(_gram(X, scaling)), subset.size)


@dataclass
class RateCurve:
    sizes: np.ndarray
    gamma_mean: np.ndarray
    gamma_sd: np.ndarray
    lambda_mean: np.ndarray
    lambda_sd: np.ndarray
    gamma_all: np.ndarray  # (replications, len(sizes))
    rho: float
    n: int
    replications: int
    epsilon: float
    scaling: str

    def rows(self):
        return [
            [self.n, self.rho, int(s), gm, gs, lm, ls]
            for s, gm, gs, lm, ls in zip(self.sizes, self.gamma_mean, self.gamma_sd, self.lambda_mean, self.lambda_sd)
        ]


RATE_HEADER = ["n", "rho", "size", "gamma_mean", "gamma_sd", "lambda_pmin_mean", "lambda_pmin_sd"]


def eigen_curve(n: int, rho: float, sizes: Sequence[int], epsilon: float = 0.01, replications: int = 30,
                seed: int = 0, scaling: str = "raw", subsets: str = "leading") -> RateCurve:
    """Mean rate and smallest eigenvalue as a function of active-set size.

    Each replication draws one Gaussian design with ``rho ** |i-j|``
    correlation and ``max(sizes)`` columns, standardizes it to
    ``<x_j, x_j>/n = 1`` and evaluates the leading ``size`` columns (or a
    random subset of that size with ``subsets="random"``).
    """
    sizes = np.asarray(sizes, dtype=int)
    if sizes.size == 0 or np.any(np.diff(sizes) <= 0) or sizes[0] < 1:
        raise ValueError("sizes must be positive and strictly increasing")
    if subsets not in ("leading", "random"):
        raise ValueError("subsets must be 'leading' or 'random'")
    m = int(sizes[-1])
    L = np.linalg.cholesky(make_sigma(m, rho))
    g = np.zeros((replications, sizes.size))
    lam = np.zeros_like(g)
    for r in range(replications):
        ss = np.random.SeedSequence(seed, spawn_key=(n, int(round(rho * 1_000_000)), r))
        rng = np.random.Generator(np.random.Philox(ss))
        X = rng.standard_normal((n, m)) @ L.T
        Xs = standardize(Dataset(X, np.zeros(n))).X
        for i, s in enumerate(sizes):
            cols = np.arange(s) if subsets == "leading" else np.sort(rng.choice(m, size=s, replace=False))
            lam[r, i] = min_nonzero_eigenvalue(_gram(Xs[:, cols], scaling))
            g[r, i] = gamma(epsilon, lam[r, i], int(s))
    return RateCurve(sizes, g.mean(0), g.std(0), lam.mean(0), lam.std(0), g, rho, n, replications, epsilon, scaling)


def isotonic_deviation(values, increasing: bool = True) -> float:
    """Largest relative gap between ``values`` and its monotone least-squares fit."""
    v = np.asarray(values, dtype=float)
    fit = isotonic_regression(v, increasing=increasing).x
    return float(np.max(np.abs(v - fit) / np.maximum(np.abs(v), np.finfo(float).tiny)))


@dataclass
class BoundTrace:
    """Both sides of the LS-boost prediction bound at every recorded step."""

    steps: np.ndarray
    lhs: np.ndarray
    contraction: np.ndarray  # ||X b_LS|| * gamma^(k/2)
    offset: float  # sqrt(2n ||grad L(beta*)|| ||b_LS - beta*||)
    gamma: float

    @property
    def bound(self) -> np.ndarray:
        return self.contraction + self.offset

    def holds(self, slack: float = 1e-9) -> bool:
        return bool(np.all(self.lhs <= self.bound + slack))

    def rows(self):
        return [[int(k), a, b, self.offset, c] for k, a, b, c in zip(self.steps, self.lhs, self.contraction, self.bound)]


BOUND_HEADER = ["step", "lhs", "contraction", "offset", "bound"]


def _normalized_problem(data, beta_star, subset):
    if not isinstance(subset, ActiveSet):
        subset = ActiveSet.of(subset)
    b = np.asarray(getattr(beta_star, "values", beta_star), dtype=float)
    outside = np.setdiff1d(np.flatnonzero(b), subset.as_array())
    if outside.size:
        raise ValueError(f"beta_star has nonzeros outside the subset: {outside.tolist()}")
    idx = subset.as_array()
    sub, norms = normalize_columns(Dataset(data.X[:, idx], data.y))
    if np.any(norms == 0):
        raise ValueError("zero column in subset")
    b_n = b[idx] * norms
    ls = ls_solve(sub, range(idx.size)).values
    grad = loss_gradient(sub, b_n)
    offset = float(np.sqrt(2 * sub.X.shape[0] * np.linalg.norm(grad) * np.linalg.norm(ls - b_n)))
    return sub, norms, b_n, ls, offset


def prediction_bound_terms(data, beta_star, path, subset=None) -> BoundTrace:
    """Evaluate ``||X b^k - X b*|| <= ||X b_LS|| gamma^(k/2) + offset`` along ``path``.

    ``path`` is an LS-boost run on ``subset`` (default: the path's own
    subset).  ``beta_star`` must be supported on the subset.  The
    contraction term uses the least-squares fit on the whole subset and
    gamma from the unit-normalized subset Gram matrix.
    """
    subset = path.subset if subset is None else subset
    sub, norms, b_n, ls, offset = _normalized_problem(data, beta_star, subset)
    pq = sub.X.shape[1]
    g = gamma(path.learning_rate, min_nonzero_eigenvalue(sub.X.T @ sub.X), pq)
    B = path.local_path() * norms  # coefficients in normalized coordinates
    steps = np.arange(B.shape[0])
    lhs = np.linalg.norm(sub.X @ (B - b_n).T, axis=0)
    contraction = np.linalg.norm(sub.X @ ls) * g ** (steps / 2.0)
    return BoundTrace(steps, lhs, contraction, offset, g)


@dataclass(frozen=True)
class StagewiseBound:
    witness: int  # -1 when no index qualifies
    bound: float
    lhs: np.ndarray


def fs_bound_value(ls_fit_sq: float, lambda_pmin: float, p: int, epsilon: float, k: int, offset: float) -> float:
    """Right side of the forward-stagewise bound after ``k`` iterations."""
    if lambda_pmin <= 0:
        return np.inf
    return float(np.sqrt(p) / np.sqrt(lambda_pmin) * (ls_fit_sq / (epsilon * (k + 1)) + epsilon) + offset)


def fs_bound_terms(data, beta_star, path, k: int, subset=None) -> StagewiseBound:
    """Smallest ``i <= k`` with ``||X b^i - X b*||`` under the forward-stagewise bound.

    ``path`` is a forward-stagewise run with at least ``k`` steps (or one
    that halted earlier, in which case its last iterate repeats).
    """
    subset = path.subset if subset is None else subset
    sub, norms, b_n, ls, offset = _normalized_problem(data, beta_star, subset)
    pq = sub.X.shape[1]
    lam = min_nonzero_eigenvalue(sub.X.T @ sub.X)
    fit = sub.X @ ls
    bound = fs_bound_value(float(fit @ fit), lam, pq, path.learning_rate, k, offset)
    B = path.local_path()
    last = min(k, B.shape[0] - 1)
    lhs = np.linalg.norm(sub.X @ (B[: last + 1] * norms - b_n).T, axis=0)
    ok = np.flatnonzero(lhs <= bound)
    return StagewiseBound(int(ok[0]) if ok.size else -1, bound, lhs)


@dataclass
class RateRow:
    n: int
    scaled_loss: float  # mean over replications of n * inf L_n
    scaled_gap: float  # mean of n * |L_n(beta*) - inf L_n|
    replications: int


def family_losses(family, data) -> np.ndarray:
    """In-sample loss of every candidate (original scale, intercept included)."""
    _, _, B, b0 = family.stacked()
    R = data.y[:, None] - data.X @ B.T - b0
    return np.einsum("ij,ij->j", R, R) / (2 * data.X.shape[0])


def rate_check(ns: Sequence[int], method: str = "lassoed_boosting", p: int = 10, s: int = 5, beta_type: int = 2,
               rho: float = 0.35, snr: float = 1.0, replications: int = 10, seed: int = 0,
               settings: FitSettings = FitSettings()):
    """Scaled minimum in-sample loss over a method's family for growing ``n``.

    For each ``n`` reports the replication means of ``n * inf L_n`` and of
    ``n * |L_n(beta*) - inf L_n|``.  The second isolates the part of the
    loss that the estimator controls; the first also contains the noise
    level, which grows linearly in ``n``.
    """
    out = []
    for n in ns:
        cfg = SimConfig(beta_type=beta_type, n=n, p=p, s=s, rho=rho, snr=(snr,), replications=replications,
                        seed=seed, methods=(method,))
        scaled, gaps = [], []
        for rep in range(replications):
            draw = draw_dataset(cfg, snr, rep)
            fam = fit_families(standardize(draw.train), (method,), settings)[method]
            inf_loss = float(family_losses(fam, draw.train).min())
            r = draw.train.y - draw.train.X @ draw.beta_star.values
            true_loss = float(r @ r) / (2 * n)
            scaled.append(n * inf_loss)
            gaps.append(n * abs(true_loss - inf_loss))
        out.append(RateRow(int(n), float(np.mean(scaled)), float(np.mean(gaps)), replications))
    return out


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
