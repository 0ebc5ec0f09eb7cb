"""Path-family generators: lasso screening followed by a second-stage refit.

Every generator returns a :class:`PathFamily` whose candidates are stored in
the original (destandardized) scale, ready for validation tuning.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .boosting import BoostConfig, forward_stagewise, ls_boost, subsample_steps
from .core import ActiveSet, CoefVector, ls_solve
from .lasso import LambdaGrid, LassoPath, fit_lasso_path

METHODS = (
    "lasso",
    "forward_stepwise",
    "relaxed_lasso",
    "lassoed_boosting",
    "lassoed_forward_stagewise",
    "twiced_lasso",
    "twiced_boosting",
)


@dataclass
class FamilyEntry:
    """Candidates spawned from one first-stage active set.

    ``coefs`` is ``(m, p)`` in the original scale with matching
    ``intercepts``; ``stage2_index`` labels each row (boosting step, weight
    index, second-stage lambda index or stepwise step).
    """

    q: int
    key: float
    active: ActiveSet
    stage2_index: np.ndarray
    coefs: np.ndarray
    intercepts: np.ndarray

    def __len__(self):
        return self.coefs.shape[0]

    def candidate(self, i: int) -> CoefVector:
        return CoefVector(self.coefs[i].copy(), float(self.intercepts[i]))


@dataclass
class PathFamily:
    method: str
    entries: List[FamilyEntry]
    stage2: str = ""
    flags: dict = field(default_factory=dict)

    @property
    def n_candidates(self) -> int:
        return sum(len(e) for e in self.entries)

    def stacked(self):
        """All candidates as arrays ``(q, stage2_index, coefs, intercepts)``."""
        if not self.entries:
            raise ValueError("empty path family")
        q = np.concatenate([np.full(len(e), e.q) for e in self.entries])
        s2 = np.concatenate([e.stage2_index for e in self.entries])
        B = np.vstack([e.coefs for e in self.entries])
        b0 = np.concatenate([e.intercepts for e in self.entries])
        return q, s2, B, b0

    def candidates(self):
        for e in self.entries:
            for i in range(len(e)):
                yield e, int(e.stage2_index[i]), e.candidate(i)


def _entry(sdata, q, key, active, stage2_index, B_std):
    B, b0 = sdata.destandardize_many(B_std)
    return FamilyEntry(q, float(key), active, np.asarray(stage2_index, dtype=int), B, b0)


def _zero_entry(sdata, q, key):
    return _entry(sdata, q, key, ActiveSet(), [0], np.zeros((1, sdata.p)))


def _distinct_sets(path: LassoPath):
    """First occurrence (q, lambda, set) of each distinct lasso support."""
    seen = set()
    out = []
    for q, (lam, A) in enumerate(zip(path.grid.values, path.active)):
        if A.indices in seen:
            continue
        seen.add(A.indices)
        out.append((q, float(lam), A))
    return out


def lasso_family(path: LassoPath, sdata) -> PathFamily:
    entries = [
        _entry(sdata, q, lam, A, [0], path.coefs[q][None, :])
        for q, (lam, A) in enumerate(zip(path.grid.values, path.active))
    ]
    return PathFamily("lasso", entries, "none")


def _boosted_entry(sdata, q, key, A, config, steps, engine):
    if A.size == 0:
        return _zero_entry(sdata, q, key), {}
    bp = engine(sdata, A, config)
    ks = subsample_steps(bp.stop, steps)
    if ks.size == 0:
        ks = np.array([0])
    return _entry(sdata, q, key, A, ks, bp.coefs_at(ks)), {"k_star": bp.k_star, "stop": bp.stop}


def _lassoed(sdata, grid, config, steps, engine, method, path=None, threads=1, tol=1e-7):
    if path is None:
        path = fit_lasso_path(sdata, grid, tol=tol)
    sets = _distinct_sets(path)

    def work(item):
        q, lam, A = item
        return _boosted_entry(sdata, q, lam, A, config, steps, engine)

    if threads > 1:
        # the compiled kernels release the GIL; map preserves input order
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, sets))
    else:
        results = [work(item) for item in sets]
    entries = [e for e, _ in results]
    info = {q: meta for (q, _, _), (_, meta) in zip(sets, results)}
    flags = {"lasso_converged": bool(path.converged.all()), "stage2": info}
    return PathFamily(method, entries, f"{steps} equally spaced boosting steps", flags)


def lassoed_boosting(sdata, grid: LambdaGrid, config: BoostConfig = BoostConfig(), steps: int = 50,
                     path: Optional[LassoPath] = None, threads: int = 1) -> PathFamily:
    """Lasso screening, then LS-boost on every distinct active set.

    Parameters
    ----------
    sdata : StandardizedDataset
        Training data.
    grid : LambdaGrid
        First-stage penalties.  Ignored when ``path`` is given.
    config : BoostConfig
        Second-stage learning rate and stopping rule.
    steps : int
        Number of equally spaced boosting steps kept as candidates.
    path : LassoPath, optional
        Precomputed first-stage path, shared between families.
    threads : int
        Worker threads for the independent second-stage runs.

    Returns
    -------
    PathFamily
        One entry per distinct active set, in order of first appearance.
    """
    return _lassoed(sdata, grid, config, steps, ls_boost, "lassoed_boosting", path, threads)


def lassoed_forward_stagewise(sdata, grid: LambdaGrid, config: BoostConfig = BoostConfig(), steps: int = 50,
                              path: Optional[LassoPath] = None, threads: int = 1) -> PathFamily:
    """Lasso screening, then forward stagewise on every distinct active set."""
    return _lassoed(sdata, grid, config, steps, forward_stagewise, "lassoed_forward_stagewise", path, threads)


def relaxed_lasso(path: LassoPath, sdata, weights=None) -> PathFamily:
    """Convex combinations ``w*lasso + (1-w)*LS`` on each lasso active set.

    Default weights are 50 equally spaced values on [0, 1].
    """
    w = np.linspace(0.0, 1.0, 50) if weights is None else np.asarray(weights, dtype=float)
    if w.size == 0 or np.any((w < 0) | (w > 1)):
        raise ValueError("weights must lie in [0, 1]")
    ls_cache = {}
    entries = []
    for q, (lam, A) in enumerate(zip(path.grid.values, path.active)):
        if A.size == 0:
            entries.append(_zero_entry(sdata, q, lam))
            continue
        if A.indices not in ls_cache:
            ls_cache[A.indices] = ls_solve(sdata, A).values
        b_ls = ls_cache[A.indices]
        b_lasso = path.coefs[q]
        B = w[:, None] * b_lasso[None, :] + (1 - w)[:, None] * b_ls[None, :]
        # keep the endpoints bit-exact
        B[w == 1.0] = b_lasso
        B[w == 0.0] = b_ls
        entries.append(_entry(sdata, q, lam, A, np.arange(w.size), B))
    return PathFamily("relaxed_lasso", entries, f"{w.size} weights on [0, 1]")


def twiced_lasso(sdata, grid: LambdaGrid, path: Optional[LassoPath] = None, tol: float = 1e-7,
                 regrid: bool = False) -> PathFamily:
    """Second lasso path on each distinct active set over the full first-stage grid.

    With ``regrid`` the second-stage grid is rebuilt from the restricted
    data's own ``lambda0`` using the same count and range ratio.
    """
    if path is None:
        path = fit_lasso_path(sdata, grid, tol=tol)
    entries = []
    Q = grid.count
    for q, lam, A in _distinct_sets(path):
        if A.size == 0:
            entries.append(_zero_entry(sdata, q, lam))
            continue
        idx = A.as_array()
        sub = _Columns(np.ascontiguousarray(sdata.X[:, idx]), sdata.y)
        g2 = grid
        if regrid:
            from .lasso import lambda_max, make_lambda_grid

            ratio = grid.values[-1] / grid.values[0] if Q > 1 else 0.5
            g2 = make_lambda_grid(lambda_max(sub), Q, ratio)
        second = fit_lasso_path(sub, g2, tol=tol)
        B = np.zeros((Q, sdata.p))
        B[:, idx] = second.coefs
        entries.append(_entry(sdata, q, lam, A, np.arange(Q), B))
    return PathFamily("twiced_lasso", entries, f"{Q} second-stage penalties")


@dataclass
class _Columns:
    X: np.ndarray
    y: np.ndarray


def boosting_screen(sdata, config: BoostConfig = BoostConfig()) -> List[ActiveSet]:
    """First-stage LS-boost over all columns: distinct supports in order of appearance.

    Stops once every usable column has entered, at ``10 * n`` iterations
    (or ``config.max_iter``), or when the gradient vanishes.
    """
    usable = np.flatnonzero(np.einsum("ij,ij->j", sdata.X, sdata.X) > 0)
    if usable.size == 0:
        return []
    cfg = BoostConfig(config.learning_rate, config.horizon(sdata.n), "fixed")
    bp = ls_boost(sdata, ActiveSet(usable), cfg)
    sets, current = [], set()
    for j in bp.selected:
        if int(j) not in current:
            current.add(int(j))
            sets.append(ActiveSet.of(current))
            if len(current) == usable.size:
                break
    return sets


def twiced_boosting(sdata, config: BoostConfig = BoostConfig(), steps: int = 50) -> PathFamily:
    """LS-boost screening into nested sets, then LS-boost on each set."""
    entries = [_zero_entry(sdata, 0, 0)]
    for q, A in enumerate(boosting_screen(sdata, config), start=1):
        e, _ = _boosted_entry(sdata, q, q, A, config, steps, ls_boost)
        entries.append(e)
    return PathFamily("twiced_boosting", entries, f"{steps} equally spaced boosting steps")


def forward_stepwise(sdata, max_steps: int = 50, tol: float = 1e-10) -> PathFamily:
    """Greedy forward selection with exact least-squares refits.

    Entry ``m`` holds the refit on the first ``m`` selected columns; entry 0
    is the zero model.  A column whose residual against the selected ones
    is numerically zero cannot enter; when none can, selection stops.
    """
    n, p = sdata.X.shape
    if max_steps > min(n - 1, p):
        raise ValueError(f"max_steps={max_steps} exceeds min(n-1, p)={min(n - 1, p)}")
    X, y = sdata.X, sdata.y
    norms2 = np.einsum("ij,ij->j", X, X)
    r = y.copy()
    Z = X.copy()  # columns orthogonalized against the selected basis
    chosen: list[int] = []
    entries = [_zero_entry(sdata, 0, 0)]
    scale = float(y @ y)
    for m in range(1, max_steps + 1):
        z2 = np.einsum("ij,ij->j", Z, Z)
        ok = (z2 > tol * np.maximum(norms2, 1e-300)) & (norms2 > 0)
        ok[chosen] = False
        if not ok.any():
            break
        gain = np.where(ok, (Z.T @ r) ** 2 / np.where(ok, z2, 1.0), -np.inf)
        j = int(np.argmax(gain))
        if gain[j] <= 1e-28 * scale:
            break
        qv = Z[:, j] / np.sqrt(z2[j])
        r = r - qv * (qv @ r)
        Z = Z - np.outer(qv, qv @ Z)
        chosen.append(j)
        A = ActiveSet.of(chosen)
        b = ls_solve(sdata, A).values
        entries.append(_entry(sdata, m, m, A, [0], b[None, :]))
    return PathFamily("forward_stepwise", entries, "one refit per step")


def write_family_csv(family: PathFamily, path, column_names) -> None:
    """One row per candidate: method, q, key, stage2_index, nnz, intercept, coefficients."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "q", "lambda", "stage2_index", "nnz", "intercept", *column_names])
        for e in family.entries:
            for i in range(len(e)):
                row = e.coefs[i]
                w.writerow([family.method, e.q, repr(e.key), int(e.stage2_index[i]),
                            int(np.count_nonzero(row)), repr(float(e.intercepts[i])),
                            *(repr(float(v)) for v in row)])


def read_family_csv(path):
    """Inverse of :func:`write_family_csv`; returns ``(PathFamily, column_names)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    names = header[6:]
    groups: dict = {}
    method = body[0][0] if body else ""
    for r in body:
        groups.setdefault(int(r[1]), []).append(r)
    entries = []
    for q in sorted(groups):
        rs = groups[q]
        B = np.array([[float(v) for v in r[6:]] for r in rs])
        support = np.flatnonzero(np.any(B != 0, axis=0))
        entries.append(FamilyEntry(q, float(rs[0][2]), ActiveSet(support),
                                   np.array([int(r[3]) for r in rs]), B,
                                   np.array([float(r[5]) for r in rs])))
    return PathFamily(method, entries), names


@dataclass(frozen=True)
class FitSettings:
    """Solver parameters shared by every family generator.

    ``lambda_count=None`` picks 50 penalties when ``p <= 10`` and 100
    otherwise; ``min_ratio=None`` picks 1e-4 when ``n >= p`` and 1e-2
    otherwise.
    """

    lambda_count: Optional[int] = None
    min_ratio: Optional[float] = None
    learning_rate: float = 0.01
    steps: int = 50
    relax_weights: int = 50
    stepwise_steps: int = 50
    stop_rule: str = "aicc_doubled"
    twiced_regrid: bool = False

    def grid_for(self, sdata) -> LambdaGrid:
        from .lasso import default_min_ratio, lambda_max, make_lambda_grid

        n, p = sdata.X.shape
        count = self.lambda_count or (50 if p <= 10 else 100)
        ratio = self.min_ratio or default_min_ratio(n, p)
        lam0 = lambda_max(sdata)
        if lam0 <= 0:
            # constant response: every penalty gives the zero model
            lam0 = 1.0
        return make_lambda_grid(lam0, count, ratio)

    def boost_config(self) -> BoostConfig:
        return BoostConfig(self.learning_rate, None, self.stop_rule)


def fit_families(sdata, methods, settings: FitSettings = FitSettings(), threads: int = 1) -> dict:
    """Path family for each name in ``methods``, sharing one first-stage lasso path."""
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown methods {unknown}; choose from {METHODS}")
    grid = settings.grid_for(sdata)
    path = None
    if any(m in ("lasso", "relaxed_lasso", "lassoed_boosting", "lassoed_forward_stagewise", "twiced_lasso")
           for m in methods):
        path = fit_lasso_path(sdata, grid)
    cfg = settings.boost_config()
    out = {}
    for m in methods:
        if m == "lasso":
            out[m] = lasso_family(path, sdata)
        elif m == "relaxed_lasso":
            out[m] = relaxed_lasso(path, sdata, np.linspace(0.0, 1.0, settings.relax_weights))
        elif m == "lassoed_boosting":
            out[m] = lassoed_boosting(sdata, grid, cfg, settings.steps, path, threads)
        elif m == "lassoed_forward_stagewise":
            out[m] = lassoed_forward_stagewise(sdata, grid, cfg, settings.steps, path, threads)
        elif m == "twiced_lasso":
            out[m] = twiced_lasso(sdata, grid, path, regrid=settings.twiced_regrid)
        elif m == "twiced_boosting":
            out[m] = twiced_boosting(sdata, cfg, settings.steps)
        elif m == "forward_stepwise":
            n, p = sdata.X.shape
            out[m] = forward_stepwise(sdata, min(settings.stepwise_steps, n - 1, p))
    return out
