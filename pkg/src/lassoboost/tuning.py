"""Candidate selection over path families and the evaluation metrics."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .core import CoefVector, DimensionError, residual


@dataclass(frozen=True)
class TuningSelection:
    method: str
    q: int
    stage2_index: int
    coef: CoefVector
    error: float
    nnz: int


@dataclass(frozen=True)
class MetricsRecord:
    rr: float
    rte: float
    pve: float
    nnz: float
    correct_nonzeros: float

    def as_dict(self):
        return asdict(self)

    @classmethod
    def mean(cls, records):
        """Field-wise arithmetic mean of a nonempty sequence of records."""
        records = list(records)
        if not records:
            raise ValueError("no records to average")
        return cls(**{f.name: float(np.mean([getattr(r, f.name) for r in records])) for f in fields(cls)})


def _select(family, scores):
    q, s2, B, b0 = family.stacked()
    nnz = np.count_nonzero(B, axis=1)
    # lexsort uses the last key as primary
    order = np.lexsort((s2, q, nnz, scores))
    i = int(order[0])
    return TuningSelection(family.method, int(q[i]), int(s2[i]), CoefVector(B[i].copy(), float(b0[i])),
                           float(scores[i]), int(nnz[i]))


def validation_errors(family, val) -> np.ndarray:
    """Mean squared validation error of every candidate, in :meth:`PathFamily.stacked` order."""
    _, _, B, b0 = family.stacked()
    if B.shape[1] != val.X.shape[1]:
        raise DimensionError(f"family has p={B.shape[1]}, validation data p={val.X.shape[1]}")
    # one matrix-vector product per candidate keeps each score independent of its position
    out = np.empty(B.shape[0])
    for i in range(B.shape[0]):
        r = val.y - val.X @ B[i] - b0[i]
        out[i] = r @ r / r.shape[0]
    return out


def validate_select(family, val) -> TuningSelection:
    """Candidate with the smallest validation MSE.

    Ties go to fewer nonzeros, then smaller first-stage index, then smaller
    second-stage index.
    """
    return _select(family, validation_errors(family, val))


def _quad(B, beta_star, sigma):
    b = np.asarray(getattr(beta_star, "values", beta_star), dtype=float)
    S = np.asarray(sigma, dtype=float)
    if B.shape[-1] != b.shape[0] or S.shape != (b.shape[0], b.shape[0]):
        raise DimensionError("coefficient and covariance dimensions disagree")
    D = np.atleast_2d(B) - b
    return np.einsum("ij,jk,ik->i", D, S, D)


def oracle_select(family, beta_star, sigma) -> TuningSelection:
    """Candidate minimizing ``(b - beta*)' Sigma (b - beta*)``; same tie rules."""
    _, _, B, _ = family.stacked()
    return _select(family, _quad(B, beta_star, sigma))


def _slopes(beta):
    return np.asarray(getattr(beta, "values", beta), dtype=float)


def _signal(beta_star, sigma):
    b = _slopes(beta_star)
    return float(b @ np.asarray(sigma, dtype=float) @ b)


def relative_risk(beta_hat, beta_star, sigma) -> float:
    denom = _signal(beta_star, sigma)
    if denom <= 0:
        raise ValueError("relative risk undefined for a null beta_star")
    return float(_quad(_slopes(beta_hat), beta_star, sigma)[0]) / denom


def relative_test_error(beta_hat, beta_star, sigma, sigma2: float) -> float:
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    return (float(_quad(_slopes(beta_hat), beta_star, sigma)[0]) + sigma2) / sigma2


def pve(beta_hat, beta_star, sigma, sigma2: float) -> float:
    risk = float(_quad(_slopes(beta_hat), beta_star, sigma)[0])
    return 1.0 - (risk + sigma2) / (_signal(beta_star, sigma) + sigma2)


def nnz_and_correct(beta_hat, beta_star):
    """Count of exact nonzeros and of nonzeros that are also nonzero in ``beta_star``."""
    b, s = _slopes(beta_hat), _slopes(beta_star)
    if b.shape != s.shape:
        raise DimensionError("coefficient lengths differ")
    nz = b != 0
    return int(nz.sum()), int((nz & (s != 0)).sum())


def evaluate(beta_hat, beta_star, sigma, sigma2: float) -> MetricsRecord:
    nnz, correct = nnz_and_correct(beta_hat, beta_star)
    return MetricsRecord(
        relative_risk(beta_hat, beta_star, sigma),
        relative_test_error(beta_hat, beta_star, sigma, sigma2),
        pve(beta_hat, beta_star, sigma, sigma2),
        nnz,
        correct,
    )


def mspe(beta_hat, test) -> float:
    """Mean squared prediction error on ``test``, intercept included."""
    r = residual(test, beta_hat)
    return float(r @ r) / r.shape[0]
