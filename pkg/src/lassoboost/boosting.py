"""LS-boost and forward stagewise regression on a column subset.

Both engines run on the Gram matrix of the subset, so one iteration costs
``O(p_q)`` after an ``O(n p_q^2)`` setup.  Early stopping uses the corrected
AIC with degrees of freedom taken from the trace of the boosting operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .core import ActiveSet, CoefVector

STOP_RULES = ("fixed", "aicc", "aicc_doubled")
DF_MODES = ("operator", "active")


@dataclass(frozen=True)
class BoostConfig:
    """Learning rate, iteration horizon and stopping rule.

    ``max_iter=None`` means ``10 * n`` for the data at hand.  Under the
    AICc rules ``max_iter`` is the search horizon for the criterion; the
    final budget is ``aicc_multiplier * k*`` and may run past it.
    """

    learning_rate: float = 0.01
    max_iter: Optional[int] = None
    stop_rule: str = "aicc_doubled"
    aicc_multiplier: int = 2
    df_mode: str = "operator"

    def __post_init__(self):
        if not 0 < self.learning_rate < 1:
            raise ValueError("learning_rate must lie in (0, 1)")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.stop_rule not in STOP_RULES:
            raise ValueError(f"stop_rule must be one of {STOP_RULES}")
        if self.aicc_multiplier < 1:
            raise ValueError("aicc_multiplier must be a positive integer")
        if self.df_mode not in DF_MODES:
            raise ValueError(f"df_mode must be one of {DF_MODES}")

    @property
    def multiplier(self) -> int:
        if self.stop_rule == "aicc":
            return 1
        return self.aicc_multiplier

    def horizon(self, n: int) -> int:
        return self.max_iter if self.max_iter is not None else 10 * n


@dataclass
class BoostPath:
    """Recorded boosting run.

    ``indices`` are positions within ``subset`` (not global column indices);
    ``rss`` and ``df`` have one entry per step plus the starting value.
    """

    subset: ActiveSet
    p: int
    n: int
    learning_rate: float
    method: str
    indices: np.ndarray
    increments: np.ndarray
    rss: np.ndarray
    df: Optional[np.ndarray] = None
    stop: int = 0
    aicc: Optional[np.ndarray] = None
    k_star: Optional[int] = None
    halted: bool = False
    _cum: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_steps(self) -> int:
        return self.indices.shape[0]

    @property
    def selected(self) -> np.ndarray:
        """Global column index chosen at each step."""
        return self.subset.as_array()[self.indices] if self.n_steps else np.zeros(0, dtype=np.intp)

    @property
    def residual_norms(self) -> np.ndarray:
        return np.sqrt(self.rss)

    def local_path(self) -> np.ndarray:
        """(n_steps + 1, p_q) cumulative coefficients on the subset columns."""
        if self._cum is None:
            K, pq = self.n_steps, self.subset.size
            steps = np.zeros((K + 1, pq))
            steps[np.arange(1, K + 1), self.indices] = self.increments
            self._cum = np.cumsum(steps, axis=0)
        return self._cum

    def coefs_at(self, steps) -> np.ndarray:
        """Full-length coefficient vectors after each step in ``steps`` (rows)."""
        steps = np.atleast_1d(np.asarray(steps, dtype=int))
        out = np.zeros((steps.shape[0], self.p))
        out[:, self.subset.as_array()] = self.local_path()[steps]
        return out

    def coef(self, k: int) -> CoefVector:
        return CoefVector(self.coefs_at([k])[0])


def _prepare(data, subset):
    if not isinstance(subset, ActiveSet):
        subset = ActiveSet.of(subset)
    if subset.size == 0:
        raise ValueError("boosting needs a nonempty subset")
    subset.check_bounds(data.X.shape[1])
    Xa = data.X[:, subset.as_array()]
    G = np.ascontiguousarray(Xa.T @ Xa)
    zero = np.flatnonzero(np.diag(G) <= 0)
    if zero.size:
        raise ValueError(f"all-zero columns in subset: {subset.as_array()[zero].tolist()}")
    return subset, Xa, G


class _Engine:
    """Resumable state for one boosting run."""

    def __init__(self, data, subset, eps, method):
        self.subset, Xa, self.G = _prepare(data, subset)
        self.eps = eps
        self.method = method
        self.c = Xa.T @ data.y
        self.beta = np.zeros(self.subset.size)
        self.yty = float(data.y @ data.y)
        self.rss = self.yty
        if method == "ls_boost":
            self.step_fn = kernels.ls_boost_steps
            self.halt = 1e-28 * self.yty
        else:
            self.step_fn = kernels.fs_steps
            self.halt = 1e-14 * np.sqrt(self.yty * float(np.max(np.diag(self.G))))
        self.idx, self.inc, self.rss_trace = [], [], [self.rss]
        self.halted = False

    def run(self, n_steps):
        if n_steps <= 0 or self.halted:
            return
        idx = np.zeros(n_steps, dtype=np.intp)
        inc = np.zeros(n_steps)
        rss = np.zeros(n_steps)
        taken, self.rss = self.step_fn(
            self.G, self.c, self.beta, self.rss, self.eps, n_steps, idx, inc, rss, self.halt
        )
        self.idx.append(idx[:taken])
        self.inc.append(inc[:taken])
        self.rss_trace.append(rss[:taken])
        if taken < n_steps:
            self.halted = True

    @property
    def steps(self):
        return sum(len(a) for a in self.idx)

    def path(self, data, stop_index=None):
        indices = np.concatenate(self.idx) if self.idx else np.zeros(0, dtype=np.intp)
        increments = np.concatenate(self.inc) if self.inc else np.zeros(0)
        rss = np.concatenate([np.atleast_1d(a) for a in self.rss_trace])
        return BoostPath(
            subset=self.subset,
            p=data.X.shape[1],
            n=data.X.shape[0],
            learning_rate=self.eps,
            method=self.method,
            indices=indices.astype(np.intp),
            increments=increments,
            rss=rss,
            stop=indices.shape[0] if stop_index is None else stop_index,
            halted=self.halted,
        )


def _df_trace(G, indices, eps, mode):
    if mode == "operator":
        return kernels.boost_df(G, indices, eps)
    seen = np.zeros(G.shape[0], dtype=bool)
    out = np.zeros(len(indices) + 1)
    count = 0
    for k, j in enumerate(indices):
        if not seen[j]:
            seen[j] = True
            count += 1
        out[k + 1] = count
    return out


def aicc_curve(rss: np.ndarray, df: np.ndarray, n: int) -> np.ndarray:
    """Corrected AIC ``log(rss/n) + (1 + df/n) / (1 - (df + 2)/n)`` per step.

    Entries where ``df + 2 >= n`` are ``inf``: the criterion is undefined
    there.
    """
    rss = np.asarray(rss, dtype=float)
    df = np.asarray(df, dtype=float)
    out = np.full(rss.shape, np.inf)
    ok = df + 2 < n
    with np.errstate(divide="ignore"):
        out[ok] = np.log(rss[ok] / n) + (1 + df[ok] / n) / (1 - (df[ok] + 2) / n)
    return out


def _aicc_argmin(curve):
    # search is truncated at the first undefined entry
    bad = np.flatnonzero(curve[1:] == np.inf)
    last = bad[0] if bad.size else curve.shape[0] - 1
    if last < 1:
        return 1
    return int(np.argmin(curve[1:last + 1])) + 1


def _boost(data, subset, config: BoostConfig, method: str) -> BoostPath:
    eng = _Engine(data, subset, config.learning_rate, method)
    n = data.X.shape[0]
    horizon = config.horizon(n)
    eng.run(horizon)
    df_mode = "active" if method == "forward_stagewise" else config.df_mode
    if config.stop_rule == "fixed":
        path = eng.path(data)
        path.df = _df_trace(eng.G, path.indices, eng.eps, df_mode)
        return path
    path = eng.path(data)
    df = _df_trace(eng.G, path.indices, eng.eps, df_mode)
    curve = aicc_curve(path.rss, df, n)
    k_star = _aicc_argmin(curve) if path.n_steps else 0
    budget = config.multiplier * k_star
    if budget > eng.steps:
        eng.run(budget - eng.steps)
        path = eng.path(data)
        df = _df_trace(eng.G, path.indices, eng.eps, df_mode)
    path.stop = min(budget, path.n_steps)
    path.df = df
    path.aicc = curve
    path.k_star = k_star
    return path


def ls_boost(data, subset, config: BoostConfig = BoostConfig()) -> BoostPath:
    """LS-boost restricted to the columns in ``subset``.

    Each step fits every subset column to the current residual by univariate
    least squares, picks the best fit (lowest index on ties) and moves its
    coefficient by ``learning_rate`` times the univariate estimate.
    """
    return _boost(data, subset, config, "ls_boost")


def forward_stagewise(data, subset, config: BoostConfig = BoostConfig()) -> BoostPath:
    """Forward stagewise: step ``learning_rate * sign(r'x_j)`` on the most correlated column."""
    return _boost(data, subset, config, "forward_stagewise")


def boosting_df(data, path: BoostPath) -> np.ndarray:
    """Trace of the LS-boost operator ``B_k`` after every step of ``path``."""
    _, _, G = _prepare(data, path.subset)
    return kernels.boost_df(G, path.indices, path.learning_rate)


def aicc_stop(data, path: BoostPath, multiplier: int = 1) -> int:
    """AICc-minimizing step of ``path`` times ``multiplier``.

    Uses ``path.df`` when present, otherwise the operator trace.
    """
    df = path.df if path.df is not None else boosting_df(data, path)
    curve = aicc_curve(path.rss, df, data.X.shape[0])
    return multiplier * (_aicc_argmin(curve) if path.n_steps else 0)


def subsample_steps(stop: int, count: int) -> np.ndarray:
    """``count`` equally spaced step indices on ``[1, stop]`` (rounded half up, deduplicated)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    stop = getattr(stop, "stop", stop)
    if stop < 1:
        return np.zeros(0, dtype=int)
    if count == 1:
        return np.array([stop])
    raw = 1 + np.arange(count) * (stop - 1) / (count - 1)
    idx = np.floor(raw + 0.5).astype(int)
    return np.unique(idx)
