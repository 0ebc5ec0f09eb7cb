"""Time the compiled kernels against the pure-Python fallback.

Run ``python benchmarks/bench_kernels.py``; prints one line per kernel with
the median wall time of each backend and the speedup.
"""

import argparse
import statistics
import time

import numpy as np

from lassoboost.kernels import BACKENDS


def _problem(n, p, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    X /= np.sqrt((X * X).mean(axis=0))
    y = X[:, : min(5, p)].sum(axis=1) + rng.standard_normal(n)
    return X, y


def _cases(n, p, steps):
    X, y = _problem(n, p, 0)
    G = np.ascontiguousarray(X.T @ X)
    Gn = G / n
    c = X.T @ y

    def cd(mod):
        beta, g = np.zeros(p), c / n
        for lam in np.geomspace(np.abs(g).max(), 1e-3 * np.abs(g).max(), 20):
            mod.cd_lasso(Gn, g, beta, float(lam), 1e-7, 10_000)

    def boost(mod, fn):
        idx, inc, rss = np.zeros(steps, dtype=np.intp), np.zeros(steps), np.zeros(steps)
        getattr(mod, fn)(G, c.copy(), np.zeros(p), float(y @ y), 0.01, steps, idx, inc, rss, 0.0)

    idx = np.zeros(steps, dtype=np.intp)
    BACKENDS["python"].ls_boost_steps(G, c.copy(), np.zeros(p), float(y @ y), 0.01, steps, idx,
                                      np.zeros(steps), np.zeros(steps), 0.0)
    return {
        "cd_lasso (20 penalties)": cd,
        f"ls_boost_steps ({steps})": lambda m: boost(m, "ls_boost_steps"),
        f"fs_steps ({steps})": lambda m: boost(m, "fs_steps"),
        f"boost_df ({steps})": lambda m: m.boost_df(G, idx, 0.01),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--p", type=int, default=20)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if "cython" not in BACKENDS:
        raise SystemExit("compiled extension not built; run `pip install -e .` first")
    print(f"n={args.n} p={args.p}")
    for name, fn in _cases(args.n, args.p, args.steps).items():
        times = {}
        for backend in ("python", "cython"):
            runs = []
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                fn(BACKENDS[backend])
                runs.append(time.perf_counter() - t0)
            times[backend] = statistics.median(runs)
        print(f"{name:28s} python {times['python'] * 1e3:9.2f} ms   cython {times['cython'] * 1e3:8.3f} ms   "
              f"x{times['python'] / times['cython']:.0f}")


if __name__ == "__main__":
    main()
