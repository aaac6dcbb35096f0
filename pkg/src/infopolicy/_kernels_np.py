"""Pure-numpy implementations of the oracle enumeration kernels.

These mirror ``_kernels.pyx`` expression-for-expression so both backends
produce bit-identical results; the compiled module is built with floating
contraction disabled for the same reason.
"""

import numpy as np

NEG_INF = -1e300


def best_pair(ys, xs, py, px, vy, vx, prior, rhs, feas_tol):
    """Best feasible two-atom lottery with lower atom from ``ys`` and upper
    atom from ``xs``.  Returns (value, i_lower, i_upper, feasible_count)."""
    ny, nx = len(ys), len(xs)
    if ny == 0 or nx == 0:
        return NEG_INF, -1, -1, 0
    w = (xs[None, :] - prior) / (xs[None, :] - ys[:, None])
    ev = w * vy[:, None] + (1.0 - w) * vx[None, :]
    feas = ev >= rhs - feas_tol
    count = int(feas.sum())
    if count == 0:
        return NEG_INF, -1, -1, 0
    ep = w * py[:, None] + (1.0 - w) * px[None, :]
    ep = np.where(feas, ep, NEG_INF)
    k = int(np.argmax(ep))
    i, j = divmod(k, nx)
    return float(ep[i, j]), i, j, count


def best_triple(grid, pv, vv, prior, rhs, feas_tol):
    """Best feasible lottery with up to three atoms on ``grid``.

    For a fixed support (a, b, c) with a < prior < c the weights form a
    one-parameter family; both payoffs are affine in the parameter, so the
    optimum sits at an endpoint of the feasible sub-interval.
    Returns (value, ia, ib, ic, t_mid, feasible_count)."""
    n = len(grid)
    lo_idx = np.flatnonzero(grid < prior)
    hi_idx = np.flatnonzero(grid > prior)
    best = NEG_INF
    bi = bj = bk = -1
    bt = 0.0
    count = 0
    for i in lo_idx:
        a = grid[i]
        for k in hi_idx:
            c = grid[k]
            denom = c - a
            wa0 = (c - prior) / denom
            wc0 = (prior - a) / denom
            ev0 = wa0 * vv[i] + wc0 * vv[k]
            ep0 = wa0 * pv[i] + wc0 * pv[k]
            js = np.arange(i + 1, k)
            if len(js) == 0:
                # plain pair
                if ev0 >= rhs - feas_tol:
                    count += 1
                    if ep0 > best:
                        best, bi, bj, bk, bt = ep0, i, -1, k, 0.0
                continue
            b = grid[js]
            dev = vv[js] - ((c - b) * vv[i] + (b - a) * vv[k]) / denom
            dep = pv[js] - ((c - b) * pv[i] + (b - a) * pv[k]) / denom
            t_max = np.minimum((c - prior) / (c - b), (prior - a) / (b - a))
            # feasible t interval [t_lo, t_hi] inside [0, t_max]
            t_lo = np.zeros(len(js))
            t_hi = t_max.copy()
            pos = dev > 0.0
            neg = dev < 0.0
            zer = ~(pos | neg)
            need = rhs - feas_tol - ev0
            with np.errstate(divide="ignore", invalid="ignore"):
                cut = need / dev
            t_lo[pos] = np.maximum(0.0, cut[pos])
            t_hi[neg] = np.minimum(t_max[neg], cut[neg])
            infeas_zero = zer & (ev0 < rhs - feas_tol)
            t_lo[infeas_zero] = 1.0
            t_hi[infeas_zero] = 0.0
            ok = t_lo <= t_hi
            if not np.any(ok):
                continue
            count += int(ok.sum())
            t_pick = np.where(dep >= 0.0, t_hi, t_lo)
            val = ep0 + t_pick * dep
            val = np.where(ok, val, NEG_INF)
            m = int(np.argmax(val))
            if val[m] > best:
                best = float(val[m])
                bi, bj, bk, bt = i, int(js[m]), k, float(t_pick[m])
    return best, bi, bj, bk, bt, count
