"""Dense linear-algebra substrate shared by every solver.

Datasets, column standardization, the least-squares loss and its gradient,
subset least-squares solves and the smallest nonzero eigenvalue of a Gram
matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class DimensionError(ValueError):
    """Raised when array shapes disagree."""


@dataclass(frozen=True)
class Dataset:
    """Design matrix ``X`` (rows are observations) and response ``y``."""

    X: np.ndarray
    y: np.ndarray
    column_names: tuple = ()

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2:
            raise DimensionError(f"X must be 2-d, got shape {X.shape}")
        n, p = X.shape
        if n < 1 or p < 1:
            raise DimensionError(f"need n >= 1 and p >= 1, got {X.shape}")
        if y.shape[0] != n:
            raise DimensionError(f"y has {y.shape[0]} rows, X has {n}")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("dataset contains non-finite entries")
        names = tuple(self.column_names) or tuple(f"x{j}" for j in range(p))
        if len(names) != p:
            raise DimensionError(f"{len(names)} column names for {p} columns")
        if len(set(names)) != p:
            raise ValueError("column names must be distinct")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def take_rows(self, rows) -> "Dataset":
        return Dataset(self.X[rows], self.y[rows], self.column_names)


@dataclass(frozen=True)
class CoefVector:
    """Slope coefficients plus an intercept."""

    values: np.ndarray
    intercept: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).ravel())
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def support(self) -> "ActiveSet":
        return ActiveSet(np.flatnonzero(self.values))

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.values))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.values + self.intercept


@dataclass(frozen=True)
class ActiveSet:
    """Strictly increasing tuple of column indices."""

    indices: tuple = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in np.asarray(self.indices, dtype=int).ravel())
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices must be strictly increasing: {idx}")
        if idx and idx[0] < 0:
            raise ValueError("indices must be nonnegative")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, indices) -> "ActiveSet":
        """Build from any iterable of indices, sorting and removing duplicates."""
        return cls(tuple(sorted(set(int(i) for i in indices))))

    @property
    def size(self) -> int:
        return len(self.indices)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, j):
        return j in self.indices

    def issubset(self, other: "ActiveSet") -> bool:
        return set(self.indices) <= set(other.indices)

    def check_bounds(self, p: int) -> None:
        if self.indices and self.indices[-1] >= p:
            raise DimensionError(f"index {self.indices[-1]} out of range for p={p}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)


@dataclass(frozen=True)
class StandardizedDataset:
    """Centered and scaled copy of a :class:`Dataset`.

    Columns satisfy ``mean == 0`` and ``<x_j, x_j>/n == 1``; ``y`` is
    centered.  Constant columns are left as zeros and flagged in
    ``constant``.
    """

    X: np.ndarray
    y: np.ndarray
    column_names: tuple
    col_means: np.ndarray
    col_scales: np.ndarray
    y_mean: float
    constant: np.ndarray = field(default=None)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def base(self) -> Dataset:
        return Dataset(self.X, self.y, self.column_names)

    def destandardize(self, beta) -> CoefVector:
        """Map standardized-scale slopes to original-scale slopes and intercept."""
        b = np.asarray(getattr(beta, "values", beta), dtype=float)
        if b.shape != (self.p,):
            raise DimensionError(f"expected {self.p} coefficients, got {b.shape}")
        out = np.zeros(self.p)
        ok = ~self.constant
        out[ok] = b[ok] / self.col_scales[ok]
        return CoefVector(out, self.y_mean - float(self.col_means @ out))

    def destandardize_many(self, B: np.ndarray):
        """Row-wise :meth:`destandardize` for a (m, p) matrix; returns (slopes, intercepts)."""
        B = np.atleast_2d(np.asarray(B, dtype=float))
        out = np.zeros_like(B)
        ok = ~self.constant
        out[:, ok] = B[:, ok] / self.col_scales[ok]
        return out, self.y_mean - out @ self.col_means

    def restandardize(self, coef: CoefVector) -> np.ndarray:
        """Inverse of :meth:`destandardize` on the slopes."""
        v = np.asarray(coef.values, dtype=float)
        out = v * self.col_scales
        out[self.constant] = 0.0
        return out


def standardize(data: Dataset) -> StandardizedDataset:
    if data.n < 2:
        raise ValueError("standardize needs at least two observations")
    X, y = data.X, data.y
    means = X.mean(axis=0)
    Xc = X - means
    scales = np.sqrt(np.mean(Xc * Xc, axis=0))
    # a column is constant when its spread is at rounding level of its magnitude
    ref = np.maximum(np.abs(means), 1.0)
    constant = scales <= 1e-13 * ref
    Xs = np.zeros_like(Xc)
    ok = ~constant
    Xs[:, ok] = Xc[:, ok] / scales[ok]
    y_mean = float(y.mean())
    return StandardizedDataset(
        X=Xs,
        y=y - y_mean,
        column_names=data.column_names,
        col_means=means,
        col_scales=np.where(constant, 0.0, scales),
        y_mean=y_mean,
        constant=constant,
    )


def normalize_columns(data: Dataset):
    """Scale every nonzero column to unit Euclidean norm.

    Returns the rescaled dataset and the norms used, so that original-scale
    coefficients ``b`` map to ``b * norms``.
    """
    norms = np.linalg.norm(data.X, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    return Dataset(data.X / safe, data.y, data.column_names), norms


def _coef_array(beta, p: int) -> tuple[np.ndarray, float]:
    if isinstance(beta, CoefVector):
        values, b0 = beta.values, beta.intercept
    else:
        values, b0 = np.asarray(beta, dtype=float).ravel(), 0.0
    if values.shape[0] != p:
        raise DimensionError(f"coefficient length {values.shape[0]} != p={p}")
    return values, b0


def residual(data, beta) -> np.ndarray:
    values, b0 = _coef_array(beta, data.X.shape[1])
    return data.y - data.X @ values - b0


def loss(data, beta) -> float:
    """Least-squares loss ``||y - X beta||^2 / (2n)`` (intercept included)."""
    r = residual(data, beta)
    return float(r @ r) / (2.0 * r.shape[0])


def loss_gradient(data, beta) -> np.ndarray:
    """Gradient of :func:`loss` with respect to the slopes, ``-X'(y - X beta)/n``."""
    r = residual(data, beta)
    return -(data.X.T @ r) / r.shape[0]


def ls_solve(data, subset: ActiveSet | Sequence[int]) -> CoefVector:
    """Minimum-norm least squares on the columns in ``subset``; zeros elsewhere."""
    if not isinstance(subset, ActiveSet):
        subset = ActiveSet.of(subset)
    if subset.size == 0:
        raise ValueError("ls_solve needs a nonempty subset")
    p = data.X.shape[1]
    subset.check_bounds(p)
    idx = subset.as_array()
    sol, *_ = np.linalg.lstsq(data.X[:, idx], data.y, rcond=None)
    values = np.zeros(p)
    values[idx] = sol
    return CoefVector(values, 0.0)


def min_nonzero_eigenvalue(M: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric PSD matrix above the numerical-rank cutoff.

    The cutoff is ``dim * eps * lambda_max``.  A matrix with no eigenvalue
    above the cutoff (the zero matrix) returns ``0.0``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got {M.shape}")
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-10 * max(1.0, np.abs(M).max(initial=0.0))):
        raise ValueError("matrix is not symmetric")
    w = np.linalg.eigvalsh(M)
    lam_max = w[-1]
    if lam_max <= 0:
        return 0.0
    tol = M.shape[0] * np.finfo(float).eps * lam_max
    above = w[w > tol]
    return float(above[0]) if above.size else 0.0
