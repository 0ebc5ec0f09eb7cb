"""Pathwise lasso by cyclic coordinate descent with warm starts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np

from . import kernels
from .core import ActiveSet, CoefVector

DEFAULT_TOL = 1e-7


@dataclass(frozen=True)
class LambdaGrid:
    """Strictly decreasing positive penalties with the null-model value ``lambda0``."""

    values: np.ndarray
    lambda0: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("empty lambda grid")
        if np.any(v <= 0):
            raise ValueError("lambda values must be positive")
        if np.any(np.diff(v) >= 0):
            raise ValueError("lambda values must be strictly decreasing")
        if v[0] > self.lambda0 * (1 + 1e-12):
            raise ValueError("first lambda exceeds lambda0")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "lambda0", float(self.lambda0))

    @property
    def count(self) -> int:
        return self.values.shape[0]

    def __len__(self):
        return self.values.shape[0]


@dataclass
class LassoPath:
    grid: LambdaGrid
    coefs: np.ndarray  # (Q, p)
    converged: np.ndarray
    n_iter: np.ndarray

    @property
    def active(self) -> List[ActiveSet]:
        return [ActiveSet(np.flatnonzero(b)) for b in self.coefs]

    def coef(self, q: int) -> CoefVector:
        return CoefVector(self.coefs[q].copy())


class KKTViolation(NamedTuple):
    index: int
    coef: float
    correlation: float  # <x_j, y - X beta>/n
    excess: float


def lambda_max(data) -> float:
    """Smallest penalty at which the lasso solution is the zero vector."""
    if data.X.shape[1] == 0:
        raise ValueError("no columns")
    return float(np.max(np.abs(data.X.T @ data.y)) / data.X.shape[0])


def default_min_ratio(n: int, p: int) -> float:
    return 1e-4 if n >= p else 1e-2


def make_lambda_grid(lambda0: float, count: int, min_ratio: float = 1e-4) -> LambdaGrid:
    """``count`` log-equally-spaced penalties from ``lambda0`` to ``lambda0*min_ratio``."""
    if not lambda0 > 0:
        raise ValueError(f"lambda0 must be positive, got {lambda0}")
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 0 < min_ratio < 1:
        raise ValueError("min_ratio must lie in (0, 1)")
    if count == 1:
        return LambdaGrid(np.array([lambda0]), lambda0)
    values = lambda0 * np.geomspace(1.0, min_ratio, count)
    values[0] = lambda0
    return LambdaGrid(values, lambda0)


def linear_lambda_grid(lambda0: float, count: int) -> LambdaGrid:
    """``count`` equally spaced penalties ``lambda0 * (1 - q/count)``, q = 0..count-1."""
    if not lambda0 > 0:
        raise ValueError(f"lambda0 must be positive, got {lambda0}")
    q = np.arange(count)
    return LambdaGrid(lambda0 * (count - q) / count, lambda0)


def _kkt_from_corr(beta, corr, lam, tol):
    out = []
    for j in range(beta.shape[0]):
        b, c = beta[j], corr[j]
        if b != 0.0:
            excess = abs(c - lam * np.sign(b))
            if excess > tol:
                out.append(KKTViolation(j, float(b), float(c), float(excess)))
        elif abs(c) > lam + tol:
            out.append(KKTViolation(j, 0.0, float(c), float(abs(c) - lam)))
    return out


def kkt_check(data, beta, lam: float, tol: float = 1e-6) -> List[KKTViolation]:
    """Subgradient optimality violations of the lasso objective at ``beta``.

    Empty iff active coordinates satisfy ``<x_j, r>/n = lam*sign(beta_j)``
    and inactive ones ``|<x_j, r>/n| <= lam`` (both within ``tol``).
    """
    b = np.asarray(getattr(beta, "values", beta), dtype=float)
    r = data.y - data.X @ b
    corr = data.X.T @ r / data.X.shape[0]
    return _kkt_from_corr(b, corr, lam, tol)


def _polish(G, c, beta, lam):
    """Exact solution for the current support and signs, or None.

    Solves ``G_AA b = c_A - lam * sign(beta_A)``; the result is returned only
    if it keeps every sign, so the caller can accept it after a KKT check.
    """
    A = np.flatnonzero(beta)
    if A.size == 0:
        return None
    sgn = np.sign(beta[A])
    try:
        b = np.linalg.solve(G[np.ix_(A, A)], c[A] - lam * sgn)
    except np.linalg.LinAlgError:
        return None
    if np.any(np.sign(b) != sgn):
        return None
    out = np.zeros_like(beta)
    out[A] = b
    return out


def _solve_one(G, c, beta, g, lam, tol, max_iter, chunk=50):
    """Coordinate descent at one penalty, warm-started from ``beta``.

    After the sweep criterion fires, the gradient is recomputed from scratch
    and the KKT conditions checked at ``tol``; sweeps continue otherwise.
    On ill-conditioned problems CD can crawl once the support has settled,
    so every ``chunk`` sweeps an exact solve on the current support is tried
    and kept if it passes the same KKT check.
    """
    used = 0
    while used < max_iter:
        sweeps, ok = kernels.cd_lasso(G, g, beta, lam, tol, min(chunk, max_iter - used))
        used += sweeps
        g[:] = c - G @ beta
        if ok and not _kkt_from_corr(beta, g, lam, tol):
            return used, True
        if not ok:
            b = _polish(G, c, beta, lam)
            if b is not None:
                gb = c - G @ b
                if not _kkt_from_corr(b, gb, lam, tol):
                    beta[:] = b
                    g[:] = gb
                    return used, True
    return used, False


def fit_lasso_path(data, grid: LambdaGrid, tol: float = DEFAULT_TOL, max_iter: int = 100_000) -> LassoPath:
    """Lasso solutions at every penalty of ``grid``.

    Minimizes ``||y - X b||^2/(2n) + lam*|b|_1`` by cyclic coordinate descent
    in ascending index order, each penalty warm-started from the previous
    solution.  Non-convergence is flagged per penalty rather than raised.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    X, y = data.X, data.y
    n, p = X.shape
    G = np.ascontiguousarray(X.T @ X / n)
    c = X.T @ y / n
    beta = np.zeros(p)
    g = c.copy()
    Q = grid.count
    coefs = np.zeros((Q, p))
    converged = np.zeros(Q, dtype=bool)
    n_iter = np.zeros(Q, dtype=int)
    # penalties at lambda0 up to rounding give the zero vector exactly, even
    # when lambda0 was computed from a differently laid out copy of X
    null_level = float(np.max(np.abs(c))) * (1 - 1e-12) if p else 0.0
    for q, lam in enumerate(grid.values):
        if lam >= null_level and not beta.any():
            converged[q] = True
            continue
        n_iter[q], converged[q] = _solve_one(G, c, beta, g, float(lam), tol, max_iter)
        coefs[q] = beta
    return LassoPath(grid, coefs, converged, n_iter)


def lasso_objective(data, beta, lam: float) -> float:
    b = np.asarray(getattr(beta, "values", beta), dtype=float)
    r = data.y - data.X @ b
    return float(r @ r) / (2 * data.X.shape[0]) + lam * float(np.abs(b).sum())


def active_sets(path: LassoPath, dedupe: bool = False):
    """``(lambda_q, ActiveSet)`` pairs in grid order.

    With ``dedupe`` consecutive identical supports collapse onto the first
    penalty at which they appear.
    """
    out = []
    for lam, A in zip(path.grid.values, path.active):
        if dedupe and out and out[-1][1] == A:
            continue
        out.append((float(lam), A))
    return out
