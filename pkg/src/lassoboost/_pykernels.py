"""Pure-Python reference implementations of the hot loops.

Every function mirrors ``_ckernels.pyx`` exactly: same arguments, same
in-place updates, same tie-breaking (lowest index wins).
"""

import numpy as np


def cd_lasso(G, g, beta, lam, tol, max_sweeps):
    """Cyclic coordinate descent for ``b'Gb/2 - c'b + lam*|b|_1``.

    ``g`` holds ``c - G beta`` and is updated in place together with
    ``beta``.  Returns ``(sweeps, converged)``; convergence means the largest
    coefficient change in a sweep fell below ``tol``.
    """
    p = beta.shape[0]
    diag = G.diagonal().tolist()
    cols = [G[:, j] for j in range(p)]
    for sweep in range(1, max_sweeps + 1):
        max_delta = 0.0
        for j in range(p):
            gjj = diag[j]
            if gjj <= 0.0:
                continue
            bj = beta.item(j)
            z = g.item(j) + gjj * bj
            if z > lam:
                new = (z - lam) / gjj
            elif z < -lam:
                new = (z + lam) / gjj
            else:
                new = 0.0
            d = new - bj
            if d != 0.0:
                g -= d * cols[j]
                beta[j] = new
                if abs(d) > max_delta:
                    max_delta = abs(d)
        if max_delta < tol:
            return sweep, True
    return max_sweeps, False


def ls_boost_steps(G, c, beta, rss, eps, n_steps, idx_out, inc_out, rss_out, halt):
    """Run up to ``n_steps`` LS-boost iterations.

    ``G`` is the raw Gram matrix of the subset columns and ``c`` the current
    residual correlations ``X'u``; both ``c`` and ``beta`` are updated in
    place.  Returns ``(steps_taken, rss)``.  Stops early when the best
    residual-sum-of-squares reduction is at most ``halt``.
    """
    p = beta.shape[0]
    shrink = 2.0 * eps - eps * eps
    for k in range(n_steps):
        best = -1
        best_gain = -1.0
        for j in range(p):
            gjj = G[j, j]
            if gjj <= 0.0:
                continue
            gain = c[j] * c[j] / gjj
            if gain > best_gain:
                best_gain = gain
                best = j
        if best < 0 or best_gain <= halt:
            return k, rss
        inc = eps * c[best] / G[best, best]
        beta[best] += inc
        c -= inc * G[:, best]
        rss -= shrink * best_gain
        if rss < 0.0:
            rss = 0.0
        idx_out[k] = best
        inc_out[k] = inc
        rss_out[k] = rss
    return n_steps, rss


def fs_steps(G, c, beta, rss, eps, n_steps, idx_out, inc_out, rss_out, halt):
    """Forward stagewise: fixed steps ``eps * sign(c_j)`` on the largest ``|c_j|``.

    Same calling convention as :func:`ls_boost_steps`; ``halt`` bounds the
    largest absolute correlation.
    """
    p = beta.shape[0]
    for k in range(n_steps):
        best = -1
        best_abs = -1.0
        for j in range(p):
            if G[j, j] <= 0.0:
                continue
            a = abs(c[j])
            if a > best_abs:
                best_abs = a
                best = j
        if best < 0 or best_abs <= halt:
            return k, rss
        inc = eps if c[best] > 0 else -eps
        rss += inc * inc * G[best, best] - 2.0 * inc * c[best]
        beta[best] += inc
        c -= inc * G[:, best]
        if rss < 0.0:
            rss = 0.0
        idx_out[k] = best
        inc_out[k] = inc
        rss_out[k] = rss
    return n_steps, rss


def boost_df(G, idx, eps):
    """Trace of the LS-boost hat operator after each step.

    The operator after ``k`` steps is ``X M X'``; only ``P = G M`` is kept,
    so the workspace is ``p x p`` rather than ``n x n``.  Returns an array of
    length ``len(idx) + 1`` starting at 0.
    """
    p = G.shape[0]
    P = np.zeros((p, p))
    out = np.zeros(len(idx) + 1)
    tr = 0.0
    for k, j in enumerate(idx):
        scale = eps / G[j, j]
        v = -scale * P[j, :]
        v[j] += scale
        col = G[:, j]
        tr += float(col @ v)
        P += np.outer(col, v)
        out[k + 1] = tr
    return out

