# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops; semantics match ``_pykernels`` line for line."""

import numpy as np

from libc.math cimport fabs


def cd_lasso(const double[:, ::1] G, double[::1] g, double[::1] beta,
             double lam, double tol, Py_ssize_t max_sweeps):
    cdef Py_ssize_t p = beta.shape[0]
    cdef Py_ssize_t sweep, j, i
    cdef double gjj, bj, z, new, d, max_delta
    cdef Py_ssize_t done = max_sweeps
    cdef bint converged = False
    with nogil:
        for sweep in range(1, max_sweeps + 1):
            max_delta = 0.0
            for j in range(p):
                gjj = G[j, j]
                if gjj <= 0.0:
                    continue
                bj = beta[j]
                z = g[j] + gjj * bj
                if z > lam:
                    new = (z - lam) / gjj
                elif z < -lam:
                    new = (z + lam) / gjj
                else:
                    new = 0.0
                d = new - bj
                if d != 0.0:
                    for i in range(p):
                        g[i] -= d * G[i, j]
                    beta[j] = new
                    if fabs(d) > max_delta:
                        max_delta = fabs(d)
            if max_delta < tol:
                done = sweep
                converged = True
                break
    return done, converged


def ls_boost_steps(const double[:, ::1] G, double[::1] c, double[::1] beta,
                   double rss, double eps, Py_ssize_t n_steps,
                   Py_ssize_t[::1] idx_out, double[::1] inc_out,
                   double[::1] rss_out, double halt):
    cdef Py_ssize_t p = beta.shape[0]
    cdef Py_ssize_t k, j, i, best
    cdef double gjj, gain, best_gain, inc
    cdef double shrink = 2.0 * eps - eps * eps
    cdef Py_ssize_t taken = n_steps
    with nogil:
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
                taken = k
                break
            inc = eps * c[best] / G[best, best]
            beta[best] += inc
            for i in range(p):
                c[i] -= inc * G[i, best]
            rss -= shrink * best_gain
            if rss < 0.0:
                rss = 0.0
            idx_out[k] = best
            inc_out[k] = inc
            rss_out[k] = rss
    return taken, rss


def fs_steps(const double[:, ::1] G, double[::1] c, double[::1] beta,
             double rss, double eps, Py_ssize_t n_steps,
             Py_ssize_t[::1] idx_out, double[::1] inc_out,
             double[::1] rss_out, double halt):
    cdef Py_ssize_t p = beta.shape[0]
    cdef Py_ssize_t k, j, i, best
    cdef double a, best_abs, inc
    cdef Py_ssize_t taken = n_steps
    with nogil:
        for k in range(n_steps):
            best = -1
            best_abs = -1.0
            for j in range(p):
                if G[j, j] <= 0.0:
                    continue
                a = fabs(c[j])
                if a > best_abs:
                    best_abs = a
                    best = j
            if best < 0 or best_abs <= halt:
                taken = k
                break
            inc = eps if c[best] > 0 else -eps
            rss += inc * inc * G[best, best] - 2.0 * inc * c[best]
            beta[best] += inc
            for i in range(p):
                c[i] -= inc * G[i, best]
            if rss < 0.0:
                rss = 0.0
            idx_out[k] = best
            inc_out[k] = inc
            rss_out[k] = rss
    return taken, rss


def boost_df(const double[:, ::1] G, idx, double eps):
    cdef Py_ssize_t p = G.shape[0]
    cdef Py_ssize_t[::1] steps = np.ascontiguousarray(idx, dtype=np.intp)
    cdef Py_ssize_t K = steps.shape[0]
    cdef double[:, ::1] P = np.zeros((p, p))
    cdef double[::1] v = np.zeros(p)
    out_arr = np.zeros(K + 1)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t k, j, a, b
    cdef double scale, tr = 0.0, acc
    with nogil:
        for k in range(K):
            j = steps[k]
            scale = eps / G[j, j]
            for b in range(p):
                v[b] = -scale * P[j, b]
            v[j] += scale
            acc = 0.0
            for a in range(p):
                acc += G[a, j] * v[a]
            tr += acc
            for a in range(p):
                if G[a, j] != 0.0:
                    for b in range(p):
                        P[a, b] += G[a, j] * v[b]
            out[k + 1] = tr
    return out_arr
