# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled oracle enumeration kernels.

Expression order matches ``_kernels_np.py`` exactly (and the build turns
floating contraction off) so the two backends return identical results.
"""

import numpy as np


DEF NEG_INF = -1e300


def best_pair(double[::1] ys, double[::1] xs, double[::1] py, double[::1] px,
              double[::1] vy, double[::1] vx, double prior, double rhs,
              double feas_tol):
    cdef Py_ssize_t ny = ys.shape[0], nx = xs.shape[0]
    cdef Py_ssize_t i, j, bi = -1, bj = -1
    cdef double w, ev, ep, best = NEG_INF
    cdef long count = 0
    if ny == 0 or nx == 0:
        return NEG_INF, -1, -1, 0
    for i in range(ny):
        for j in range(nx):
            w = (xs[j] - prior) / (xs[j] - ys[i])
            ev = w * vy[i] + (1.0 - w) * vx[j]
            if ev >= rhs - feas_tol:
                count += 1
                ep = w * py[i] + (1.0 - w) * px[j]
                if ep > best:
                    best = ep
                    bi = i
                    bj = j
    if count == 0:
        return NEG_INF, -1, -1, 0
    return best, bi, bj, count


def best_triple(double[::1] grid, double[::1] pv, double[::1] vv,
                double prior, double rhs, double feas_tol):
    cdef Py_ssize_t n = grid.shape[0]
    cdef Py_ssize_t i, j, k, k_start, bi = -1, bj = -1, bk = -1
    cdef double a, b, c, denom, wa0, wc0, ev0, ep0, dev, dep
    cdef double t_max, t_lo, t_hi, cut, need, t_pick, val
    cdef double best = NEG_INF, bt = 0.0
    cdef long count = 0
    k_start = n
    for k in range(n):
        if grid[k] > prior:
            k_start = k
            break
    for i in range(n):
        a = grid[i]
        if a >= prior:
            break
        for k in range(k_start, n):
            c = grid[k]
            denom = c - a
            wa0 = (c - prior) / denom
            wc0 = (prior - a) / denom
            ev0 = wa0 * vv[i] + wc0 * vv[k]
            ep0 = wa0 * pv[i] + wc0 * pv[k]
            if k == i + 1:
                if ev0 >= rhs - feas_tol:
                    count += 1
                    if ep0 > best:
                        best = ep0
                        bi = i
                        bj = -1
                        bk = k
                        bt = 0.0
                continue
            need = rhs - feas_tol - ev0
            for j in range(i + 1, k):
                b = grid[j]
                dev = vv[j] - ((c - b) * vv[i] + (b - a) * vv[k]) / denom
                dep = pv[j] - ((c - b) * pv[i] + (b - a) * pv[k]) / denom
                t_max = (c - prior) / (c - b)
                cut = (prior - a) / (b - a)
                if cut < t_max:
                    t_max = cut
                t_lo = 0.0
                t_hi = t_max
                if dev > 0.0:
                    cut = need / dev
                    if cut > 0.0:
                        t_lo = cut
                elif dev < 0.0:
                    cut = need / dev
                    if cut < t_max:
                        t_hi = cut
                else:
                    if ev0 < rhs - feas_tol:
                        t_lo = 1.0
                        t_hi = 0.0
                if t_lo > t_hi:
                    continue
                count += 1
                if dep >= 0.0:
                    t_pick = t_hi
                else:
                    t_pick = t_lo
                val = ep0 + t_pick * dep
                if val > best:
                    best = val
                    bi = i
                    bj = j
                    bk = k
                    bt = t_pick
    return best, bi, bj, bk, bt, count
