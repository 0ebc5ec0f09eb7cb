"""Path-integrated-gradient attribution of loss changes to coefficients.

A recorded solver trajectory ``beta_0, ..., beta_Q`` is treated as a
piecewise-linear path.  On each segment the gradient of the least-squares
loss is linear, so the trapezoid rule integrates it exactly and the
attributions add up to the total loss change up to rounding.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .boosting import BoostConfig, ls_boost
from .core import ActiveSet, Dataset, DimensionError, ls_solve
from .lasso import fit_lasso_path, lambda_max, linear_lambda_grid


@dataclass(frozen=True)
class CoefTrajectory:
    """Coefficient vectors in path order (rows) and the data the loss is evaluated on."""

    coefs: np.ndarray
    data: object
    source: str = "other"

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.coefs, dtype=float))
        if B.shape[0] < 2:
            raise ValueError("a trajectory needs at least two points")
        if B.shape[1] != self.data.X.shape[1]:
            raise DimensionError(f"trajectory has {B.shape[1]} coefficients, data has {self.data.X.shape[1]} columns")
        object.__setattr__(self, "coefs", B)

    @property
    def n_steps(self) -> int:
        return self.coefs.shape[0] - 1

    def losses(self) -> np.ndarray:
        R = self.data.y[:, None] - self.data.X @ self.coefs.T
        return np.einsum("ij,ij->j", R, R) / (2 * R.shape[0])


@dataclass(frozen=True)
class AttributionMatrix:
    """``G[j, q]``: loss change on segment ``q`` attributed to coefficient ``j``."""

    G: np.ndarray
    names: tuple = ()

    @property
    def total(self) -> float:
        return float(np.sum(self.G))


def _gradients(data, B):
    """Loss gradients at each row of ``B``, returned as columns (p, m)."""
    R = data.y[:, None] - data.X @ B.T
    return -(data.X.T @ R) / data.X.shape[0]


def straight_line_ig(data, z, z_prime, steps: int = 50) -> np.ndarray:
    """Integrated gradient of the loss along the segment from ``z_prime`` to ``z``.

    The integral is approximated by the trapezoid rule with ``steps``
    panels, which is exact here since the gradient is linear in the
    coefficients.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    z = np.asarray(getattr(z, "values", z), dtype=float)
    z0 = np.asarray(getattr(z_prime, "values", z_prime), dtype=float)
    if z.shape != z0.shape or z.shape[0] != data.X.shape[1]:
        raise DimensionError("endpoint lengths disagree with the data")
    alpha = np.linspace(0.0, 1.0, steps + 1)
    pts = z0[None, :] + alpha[:, None] * (z - z0)[None, :]
    grads = _gradients(data, pts)
    w = np.full(steps + 1, 1.0 / steps)
    w[[0, -1]] *= 0.5
    return (z - z0) * (grads @ w)


def path_ig_matrix(traj: CoefTrajectory, names=()) -> AttributionMatrix:
    """Trapezoid attributions for every coefficient and trajectory segment.

    ``G[j, q] = (d_j L(b_{q+1}) + d_j L(b_q)) / 2 * (b_{q+1, j} - b_{q, j})``.
    """
    B = traj.coefs
    grads = _gradients(traj.data, B)
    G = 0.5 * (grads[:, 1:] + grads[:, :-1]) * np.diff(B, axis=0).T
    return AttributionMatrix(G, tuple(names))


def _mat(G):
    return np.asarray(getattr(G, "G", G), dtype=float)


def per_parameter_attribution(G) -> np.ndarray:
    """Row sums: total attribution of each coefficient over the whole path."""
    return _mat(G).sum(axis=1)


def sapa(G) -> np.ndarray:
    """Stepwise aggregate attribution: column sums, one loss change per segment."""
    return _mat(G).sum(axis=0)


def scpa_capa(G):
    """Cumulative shares and cumulative aggregate attribution.

    Returns ``(scpa, capa)`` where ``capa[q]`` is the summed attribution of
    segments ``0..q`` and ``scpa[j, q]`` is parameter ``j``'s share of it.
    Columns with ``capa[q] == 0`` are undefined and filled with NaN.
    """
    M = _mat(G)
    cum = np.cumsum(M, axis=1)
    capa = cum.sum(axis=0)
    scpa = np.full_like(cum, np.nan)
    ok = capa != 0
    scpa[:, ok] = cum[:, ok] / capa[ok]
    return scpa, capa


def ftc_check(traj: CoefTrajectory, G) -> float:
    """Relative gap ``|L(b_0) + sum(G) - L(b_Q)| / max(1, |L(b_Q)|)``."""
    L = traj.losses()
    # np.sum reduces pairwise, which keeps the accumulated rounding small
    gap = abs(L[0] + float(np.sum(_mat(G))) - L[-1])
    return float(gap / max(1.0, abs(L[-1])))


def restrict(data, subset) -> Dataset:
    """Dataset made of the columns in ``subset`` only."""
    if not isinstance(subset, ActiveSet):
        subset = ActiveSet.of(subset)
    idx = subset.as_array()
    names = tuple(data.column_names[i] for i in idx)
    return Dataset(data.X[:, idx], data.y, names)


def lasso_trajectory(data, count: int = 1000) -> CoefTrajectory:
    """Lasso solutions at ``count`` equally spaced penalties from ``lambda0`` toward 0.

    The penalties are ``lambda0 * (1 - q/count)`` for ``q = 0..count-1``; the
    path is closed with the least-squares solution at zero penalty, giving
    ``count`` segments.
    """
    lam0 = lambda_max(data)
    if lam0 <= 0:
        raise ValueError("response is orthogonal to every column; the lasso path is constant")
    path = fit_lasso_path(data, linear_lambda_grid(lam0, count), tol=1e-12)
    end = ls_solve(data, range(data.X.shape[1])).values
    return CoefTrajectory(np.vstack([path.coefs, end]), data, "lasso")


def boost_trajectory(data, learning_rate: float = 0.1, n_iter: int = 1000) -> CoefTrajectory:
    """LS-boost iterates ``beta_0 = 0, ..., beta_{n_iter}`` over all columns."""
    cfg = BoostConfig(learning_rate, n_iter, "fixed")
    bp = ls_boost(data, ActiveSet(range(data.X.shape[1])), cfg)
    return CoefTrajectory(bp.coefs_at(np.arange(bp.n_steps + 1)), data, "ls-boost")


def family_trajectory(family, q: int, data) -> CoefTrajectory:
    """Candidates of one family entry, in second-stage order, starting from zero.

    Uses slopes only; with ``data`` demeaned this equals the loss with the
    fitted intercepts.
    """
    entry = next((e for e in family.entries if e.q == q), None)
    if entry is None:
        raise KeyError(f"no entry with q={q}")
    B = entry.coefs[np.argsort(entry.stage2_index, kind="stable")]
    if np.any(B[0] != 0):
        B = np.vstack([np.zeros(B.shape[1]), B])
    return CoefTrajectory(B, data, family.method)


def read_trajectory_csv(path, data) -> CoefTrajectory:
    """One coefficient vector per row; the header must match ``data.column_names``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    if tuple(rows[0]) != tuple(data.column_names):
        raise ValueError(f"{path}: header does not match the data columns")
    B = np.array([[float(v) for v in r] for r in rows[1:]])
    return CoefTrajectory(B, data, "other")


def write_matrix_csv(path, M, row_names, col_label="step") -> None:
    """``M`` with one row per name and columns ``1..Q``; NaN written as empty cells."""
    M = np.atleast_2d(M)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["parameter", *(f"{col_label}{q + 1}" for q in range(M.shape[1]))])
        for name, row in zip(row_names, M):
            w.writerow([name, *("" if np.isnan(v) else repr(float(v)) for v in row)])
