"""Flat ``key = value`` run configuration.

Lines starting with ``#`` or ``;`` are comments.  Lists are comma
separated; ``sizes`` also accepts ``start:stop:step`` (inclusive stop).
Unknown keys are an error.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields, replace
from typing import Optional, Tuple

from .simulation import DEFAULT_METHODS, DEFAULT_SNR
from .twostage import METHODS, FitSettings


def _floats(s):
    return tuple(float(v) for v in s.split(",") if v.strip())


def _ints(s):
    s = s.strip()
    if ":" in s:
        a, b, c = (int(v) for v in s.split(":"))
        return tuple(range(a, b + 1, c))
    return tuple(int(v) for v in s.split(",") if v.strip())


def _strs(s):
    return tuple(v.strip() for v in s.split(",") if v.strip())


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt_int(s):
    return None if s.strip().lower() in ("", "auto", "none") else int(s)


def _opt_float(s):
    return None if s.strip().lower() in ("", "auto", "none") else float(s)


def _opt_str(s):
    return s.strip() or None


@dataclass(frozen=True)
class RunConfig:
    # data
    input: Optional[str] = None
    response: str = "y"
    group: Optional[str] = None
    drop: Tuple[str, ...] = ()
    split: Tuple[float, ...] = (0.5, 0.25, 0.25)
    model: Optional[str] = None
    # common
    methods: Tuple[str, ...] = DEFAULT_METHODS
    tuning: str = "validation"
    seed: int = 0
    out: str = "out"
    threads: int = 1
    svg: bool = False
    # solver
    lambda_count: Optional[int] = None
    min_ratio: Optional[float] = None
    learning_rate: float = 0.01
    steps: int = 50
    relax_weights: int = 50
    stepwise_steps: int = 50
    stop_rule: str = "aicc_doubled"
    twiced_regrid: bool = False
    # simulate
    beta_type: int = 2
    n: int = 100
    p: int = 10
    s: int = 5
    rho: float = 0.35
    snr: Tuple[float, ...] = DEFAULT_SNR
    replications: int = 10
    # attribute
    trajectory: Tuple[str, ...] = ("lasso", "ls-boost")
    trajectory_file: Optional[str] = None
    subset: Tuple[str, ...] = ()
    lambda_steps: int = 1000
    boost_learning_rate: float = 0.1
    boost_iterations: int = 1000
    # diagnose
    diag_n: int = 100
    rhos: Tuple[float, ...] = (0.0, 0.35, 0.7)
    sizes: Tuple[int, ...] = tuple(range(2, 81, 2))
    diag_replications: int = 30
    diag_epsilon: float = 0.01
    gamma_scaling: str = "raw"
    subsets: str = "leading"
    bound_instances: int = 5
    bound_steps: int = 2000
    rate_ns: Tuple[int, ...] = (100, 200, 400, 800)
    rate_methods: Tuple[str, ...] = ("lassoed_boosting", "relaxed_lasso")
    rate_replications: int = 10
    rate_snr: float = 1.0
    # plot
    plot_input: Optional[str] = None
    plot_kind: str = "line"
    x: str = "snr"
    y: str = "value"
    series: Optional[str] = "method"

    def __post_init__(self):
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}")
        if len(self.split) != 3 or any(f <= 0 for f in self.split) or sum(self.split) > 1 + 1e-12:
            raise ValueError("split must be three positive fractions summing to at most 1")
        if self.tuning not in ("validation", "oracle"):
            raise ValueError("tuning must be 'validation' or 'oracle'")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.plot_kind not in ("line", "scatter"):
            raise ValueError("plot_kind must be 'line' or 'scatter'")

    def fit_settings(self) -> FitSettings:
        return FitSettings(self.lambda_count, self.min_ratio, self.learning_rate, self.steps, self.relax_weights,
                           self.stepwise_steps, self.stop_rule, self.twiced_regrid)


_PARSERS = {
    "input": _opt_str, "response": str.strip, "group": _opt_str, "drop": _strs, "split": _floats,
    "model": _opt_str, "methods": _strs, "tuning": str.strip, "seed": int, "out": str.strip, "threads": int,
    "svg": _bool, "lambda_count": _opt_int, "min_ratio": _opt_float, "learning_rate": float, "steps": int,
    "relax_weights": int, "stepwise_steps": int, "stop_rule": str.strip, "twiced_regrid": _bool,
    "beta_type": int, "n": int, "p": int, "s": int, "rho": float, "snr": _floats, "replications": int,
    "trajectory": _strs, "trajectory_file": _opt_str, "subset": _strs, "lambda_steps": int,
    "boost_learning_rate": float, "boost_iterations": int, "diag_n": int, "rhos": _floats, "sizes": _ints,
    "diag_replications": int, "diag_epsilon": float, "gamma_scaling": str.strip, "subsets": str.strip,
    "bound_instances": int, "bound_steps": int, "rate_ns": _ints, "rate_methods": _strs,
    "rate_replications": int, "rate_snr": float, "plot_input": _opt_str, "plot_kind": str.strip, "x": str.strip,
    "y": str.strip, "series": _opt_str,
}
assert set(_PARSERS) == {f.name for f in fields(RunConfig)}


def parse_config_text(text: str, base: RunConfig = RunConfig()) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), delimiters=("=",))
    cp.optionxform = str
    cp.read_string("[run]\n" + text)
    updates = {}
    for key, raw in cp["run"].items():
        if key not in _PARSERS:
            raise ValueError(f"unknown config key {key!r}")
        try:
            updates[key] = _PARSERS[key](raw)
        except ValueError as exc:
            raise ValueError(f"bad value for {key!r}: {exc}") from None
    return replace(base, **updates)


def load_config(path, base: RunConfig = RunConfig()) -> RunConfig:
    with open(path) as fh:
        return parse_config_text(fh.read(), base)
