"""Simulation benchmark: Gaussian designs, four coefficient patterns, SNR sweeps.

Every (SNR, replication) cell draws from its own counter-based random
stream derived from the master seed, so results do not depend on the order
or the number of threads that compute them.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .core import CoefVector, Dataset, standardize
from .tuning import MetricsRecord, evaluate, oracle_select, validate_select
from .twostage import FitSettings, fit_families

DEFAULT_SNR = (0.05, 0.09, 0.14, 0.25, 0.42, 0.71, 1.22, 2.07, 3.52, 6.00)
DEFAULT_METHODS = ("forward_stepwise", "lasso", "lassoed_boosting", "relaxed_lasso")
BETA_TYPES = (1, 2, 3, 5)
METRIC_FIELDS = ("rr", "rte", "pve", "nnz", "correct_nonzeros")


@dataclass(frozen=True)
class SimConfig:
    beta_type: int = 2
    n: int = 100
    p: int = 10
    s: int = 5
    rho: float = 0.35
    snr: Tuple[float, ...] = DEFAULT_SNR
    replications: int = 10
    seed: int = 0
    methods: Tuple[str, ...] = DEFAULT_METHODS
    tuning: str = "validation"
    fit: FitSettings = field(default_factory=FitSettings)

    def __post_init__(self):
        if self.beta_type not in BETA_TYPES:
            raise ValueError(f"beta_type must be one of {BETA_TYPES}")
        if min(self.n, self.p, self.s) < 1:
            raise ValueError("n, p and s must be positive")
        if self.s > self.p:
            raise ValueError("s must not exceed p")
        if not 0 <= self.rho < 1:
            raise ValueError("rho must lie in [0, 1)")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.snr or any(v <= 0 for v in self.snr):
            raise ValueError("snr values must be positive")
        if self.tuning not in ("validation", "oracle"):
            raise ValueError("tuning must be 'validation' or 'oracle'")
        object.__setattr__(self, "snr", tuple(float(v) for v in self.snr))
        object.__setattr__(self, "methods", tuple(self.methods))

    @property
    def setting(self) -> str:
        return f"n{self.n}_p{self.p}_s{self.s}"


def make_sigma(p: int, rho: float) -> np.ndarray:
    """Covariance with entries ``rho ** |i - j|``."""
    if not 0 <= rho < 1:
        raise ValueError("rho must lie in [0, 1)")
    idx = np.arange(p)
    lag = np.abs(idx[:, None] - idx[None, :])
    if rho == 0:
        return (lag == 0).astype(float)
    return rho ** lag.astype(float)


def make_beta(beta_type: int, p: int, s: int) -> CoefVector:
    """True coefficients for one of the benchmark patterns.

    Type 1 spreads ``s`` ones evenly over the indices, type 2 puts them
    first, type 3 interpolates linearly from 10 down to 0.5 on the first
    ``s`` entries and type 5 follows ``s`` leading ones with ``0.5 ** k``
    decay.
    """
    if not 1 <= s <= p:
        raise ValueError("need 1 <= s <= p")
    b = np.zeros(p)
    if beta_type == 1:
        if s == 1:
            b[0] = 1.0
        else:
            # spacing (p-1)/(s-1) >= 1, so rounding half up keeps positions distinct
            pos = np.floor(1 + np.arange(s) * (p - 1) / (s - 1) + 0.5).astype(int) - 1
            b[pos] = 1.0
    elif beta_type == 2:
        b[:s] = 1.0
    elif beta_type == 3:
        b[:s] = np.array([10.0]) if s == 1 else np.linspace(10.0, 0.5, s)
    elif beta_type == 5:
        b[:s] = 1.0
        b[s:] = 0.5 ** np.arange(1, p - s + 1)
    else:
        raise ValueError(f"beta_type must be one of {BETA_TYPES}")
    return CoefVector(b)


def noise_variance(beta_star, sigma, v: float) -> float:
    """Noise variance giving signal-to-noise ratio ``v``."""
    if v <= 0:
        raise ValueError("snr must be positive")
    b = np.asarray(getattr(beta_star, "values", beta_star), dtype=float)
    return float(b @ np.asarray(sigma) @ b) / v


@dataclass(frozen=True)
class SimDraw:
    train: Dataset
    validation: Dataset
    beta_star: CoefVector
    sigma: np.ndarray
    sigma2: float
    snr: float


def _scaled(x: float) -> int:
    return int(round(x * 1_000_000))


def stream(config: SimConfig, snr: float, rep: int) -> np.random.Generator:
    """Independent generator for one (setting, SNR, replication) cell."""
    key = (config.beta_type, config.n, config.p, config.s, _scaled(config.rho), _scaled(snr), rep)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(config.seed, spawn_key=key)))


def draw_dataset(config: SimConfig, snr: float, rep: int) -> SimDraw:
    """Training and validation samples of equal size plus the analytic test context."""
    sigma = make_sigma(config.p, config.rho)
    L = np.linalg.cholesky(sigma)
    beta = make_beta(config.beta_type, config.p, config.s)
    s2 = noise_variance(beta, sigma, snr)
    rng = stream(config, snr, rep)
    sd = math.sqrt(s2)

    def sample():
        X = rng.standard_normal((config.n, config.p)) @ L.T
        y = X @ beta.values + sd * rng.standard_normal(config.n)
        return Dataset(X, y)

    train = sample()
    val = sample()
    return SimDraw(train, val, beta, sigma, s2, snr)


def fit_and_select(draw: SimDraw, methods, tuning: str = "validation", settings: FitSettings = FitSettings(),
                   threads: int = 1):
    """Fit every method on the training sample and tune each family.

    Returns ``{method: (TuningSelection, PathFamily)}``.
    """
    sdata = standardize(draw.train)
    families = fit_families(sdata, methods, settings, threads)
    out = {}
    for m, fam in families.items():
        if tuning == "validation":
            sel = validate_select(fam, draw.validation)
        else:
            sel = oracle_select(fam, draw.beta_star, draw.sigma)
        out[m] = (sel, fam)
    return out


def run_cell(config: SimConfig, snr: float, rep: int) -> Dict[str, MetricsRecord]:
    draw = draw_dataset(config, snr, rep)
    chosen = fit_and_select(draw, config.methods, config.tuning, config.fit)
    return {m: evaluate(sel.coef, draw.beta_star, draw.sigma, draw.sigma2) for m, (sel, _) in chosen.items()}


@dataclass
class CellResult:
    mean: Optional[MetricsRecord]
    raws: List[MetricsRecord]
    failures: List[Tuple[int, str]]

    @property
    def complete(self) -> bool:
        return not self.failures


@dataclass
class ExperimentResult:
    config: SimConfig
    cells: Dict[Tuple[str, float], CellResult]

    @property
    def complete(self) -> bool:
        return all(c.complete for c in self.cells.values())

    def rows(self):
        """Tidy rows: one per replication plus one ``mean`` row per cell."""
        c = self.config
        out = []
        for snr in c.snr:
            for m in c.methods:
                cell = self.cells[(m, snr)]
                base = [c.setting, c.beta_type, c.rho, snr, m, c.tuning]
                for rep, rec in enumerate(cell.raws):
                    out.append(base + [str(rep)] + [getattr(rec, f) for f in METRIC_FIELDS])
                if cell.mean is not None:
                    out.append(base + ["mean"] + [getattr(cell.mean, f) for f in METRIC_FIELDS])
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["setting", "beta_type", "rho", "snr", "method", "tuning", "replication", *METRIC_FIELDS])
            for r in self.rows():
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])

    def manifest(self) -> dict:
        from . import __version__

        cfg = asdict(self.config)
        failures = {f"{m}@{snr!r}": cell.failures for (m, snr), cell in self.cells.items() if cell.failures}
        return {
            "package_version": __version__,
            "numpy_version": np.__version__,
            "config": cfg,
            "snr_grid": list(self.config.snr),
            "complete": self.complete,
            "failures": failures,
        }

    def write_manifest(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.manifest(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def run_experiment(config: SimConfig, threads: int = 1) -> ExperimentResult:
    """Simulate, fit, tune and evaluate every (SNR, replication) cell; average per method.

    A failing replication is recorded against every method of that cell
    rather than aborting the run.
    """
    units = [(snr, rep) for snr in config.snr for rep in range(config.replications)]

    def work(unit):
        snr, rep = unit
        try:
            return run_cell(config, snr, rep), None
        except Exception as exc:  # recorded per cell, see ExperimentResult.failures
            return None, f"{type(exc).__name__}: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, units))
    else:
        results = [work(u) for u in units]
    by_unit = dict(zip(units, results))
    cells = {}
    for snr in config.snr:
        for m in config.methods:
            raws, fails = [], []
            for rep in range(config.replications):
                rec, err = by_unit[(snr, rep)]
                if err is not None:
                    fails.append((rep, err))
                else:
                    raws.append(rec[m])
            cells[(m, snr)] = CellResult(MetricsRecord.mean(raws) if raws else None, raws, fails)
    return ExperimentResult(config, cells)
