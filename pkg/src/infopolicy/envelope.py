"""Geometry engine: concave envelopes, convex minorants, tangents, roots.

Everything operates on scalar functions of a belief in [a, b], evaluated on
a grid.  Jump discontinuities are handled by forcing the jump point onto
the grid; evaluation there must already return the upper limit (the
solvers' accept-on-indifference tie-break guarantees this), so the hull of
grid values is the upper-semicontinuous hull.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EnvelopeResult",
    "TangencyResult",
    "concave_envelope",
    "convex_minorant",
    "split_concave_envelope",
    "tangent_from_point",
    "chord_crossing",
    "golden_max",
    "bisect_root",
]

DEFAULT_GRID_N = 2001
CONTACT_TOL = 1e-8
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _build_grid(a, b, grid_n, knots=()):
    if grid_n < 3:
        raise ValueError(f"grid_n must be at least 3, got {grid_n}")
    pts = np.linspace(a, b, grid_n)
    extra = [k for k in knots if a < k < b]
    if extra:
        pts = np.unique(np.concatenate([pts, np.asarray(extra, dtype=float)]))
    return pts


def _upper_hull(xs, ys):
    """Indices of the upper convex hull of the graph, left to right."""
    hull = []
    for i in range(len(xs)):
        while len(hull) >= 2:
            i1, i2 = hull[-2], hull[-1]
            cross = (xs[i2] - xs[i1]) * (ys[i] - ys[i1]) - (ys[i2] - ys[i1]) * (
                xs[i] - xs[i1]
            )
            if cross >= 0.0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


@dataclass
class EnvelopeResult:
    """Envelope of a function on a grid.

    ``contact`` marks grid points where the envelope touches the input;
    ``segments`` lists the bridging stretches (left contact, right contact)
    where the envelope is a chord strictly above the input.
    """

    grid: np.ndarray
    values: np.ndarray
    contact: np.ndarray
    segments: list = field(default_factory=list)
    kind: str = "concave"

    def __call__(self, x):
        out = np.interp(np.asarray(x, dtype=float), self.grid, self.values)
        return float(out) if np.ndim(x) == 0 else out

    @property
    def contact_points(self):
        return self.grid[self.contact]

    def bridge_at(self, x):
        """The bridging segment containing ``x``, or None if the envelope
        touches the input there."""
        for lo, hi in self.segments:
            if lo < x < hi:
                return (lo, hi)
        return None


@dataclass
class TangencyResult:
    touch: float
    slope: float
    degenerate: bool = False


def _extract(grid, vals, env_vals, kind):
    scale = 1.0 + np.max(np.abs(vals))
    gap = np.abs(env_vals - vals)
    contact = gap <= CONTACT_TOL * scale
    idx = np.flatnonzero(contact)
    segments = []
    for left, right in zip(idx[:-1], idx[1:]):
        if right - left > 1:
            segments.append((float(grid[left]), float(grid[right])))
    return EnvelopeResult(grid, env_vals, contact, segments, kind)


def concave_envelope(fn, a, b, grid_n=DEFAULT_GRID_N, knots=()) -> EnvelopeResult:
    """Pointwise-smallest concave function above ``fn`` on [a, b], computed
    as the upper hull of the sampled graph."""
    grid = _build_grid(a, b, grid_n, knots)
    vals = np.asarray(fn(grid), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("function returned non-finite values on the grid")
    hull = _upper_hull(grid, vals)
    env = np.interp(grid, grid[hull], vals[hull])
    env = np.maximum(env, vals)
    return _extract(grid, vals, env, "concave")


def convex_minorant(fn, a, b, grid_n=DEFAULT_GRID_N, knots=()) -> EnvelopeResult:
    """Pointwise-largest convex function below ``fn`` on [a, b]."""
    neg = concave_envelope(lambda x: -np.asarray(fn(x), dtype=float), a, b, grid_n, knots)
    vals = np.asarray(fn(neg.grid), dtype=float)
    return _extract(neg.grid, vals, -neg.values, "convex")


@dataclass
class SplitEnvelope:
    """Concave envelope taken separately on each side of a split point."""

    left: EnvelopeResult
    right: EnvelopeResult
    split: float

    def __call__(self, x):
        x_a = np.asarray(x, dtype=float)
        out = np.where(x_a <= self.split, self.left(x_a), self.right(x_a))
        return float(out) if np.ndim(x) == 0 else out


def split_concave_envelope(fn, split, a=0.0, b=1.0, grid_n=DEFAULT_GRID_N) -> SplitEnvelope:
    if not a < split < b:
        raise ValueError(f"split {split} outside ({a}, {b})")
    n_left = max(3, int(grid_n * (split - a) / (b - a)))
    n_right = max(3, grid_n - n_left)
    return SplitEnvelope(
        concave_envelope(fn, a, split, n_left),
        concave_envelope(fn, split, b, n_right),
        split,
    )


def golden_max(fn, lo, hi, tol=1e-11):
    """Golden-section maximizer for a unimodal function on [lo, hi]."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def tangent_from_point(fn, anchor, lo, hi, n_scan=257, tol=1e-11,
                       minimize=False) -> TangencyResult:
    """Point of [lo, hi] maximizing (or, by flag, minimizing) the chord
    slope from ``anchor``; ties resolve to the largest point.  For an
    anchor left of the interval the upper support tangent maximizes the
    slope; for an anchor right of it, the same support minimizes it.  The
    caller guarantees the target is concave on the interval, so the slope
    profile is unimodal."""
    x0, y0 = anchor
    if hi <= lo:
        raise ValueError(f"empty tangency interval [{lo}, {hi}]")
    sign = -1.0 if minimize else 1.0

    def slope(t):
        return sign * (fn(t) - y0) / (t - x0)

    ts = np.linspace(lo, hi, n_scan)
    if abs(x0 - lo) < 1e-15:
        ts = ts[1:]
    if abs(x0 - hi) < 1e-15:
        ts = ts[:-1]
    vals = np.array([slope(t) for t in ts])
    scale = 1.0 + np.max(np.abs(vals))
    best = np.max(vals)
    tie = np.flatnonzero(vals >= best - 1e-12 * scale)
    j = int(tie[-1])
    f_lo, f_hi = fn(lo), fn(hi)
    degenerate = abs(f_hi - f_lo) < 1e-9 * (1.0 + abs(f_hi))

    if len(tie) > 1 and j == len(ts) - 1:
        # flat slope profile: honor the supremum tie-break exactly
        touch = float(ts[-1])
    elif j in (0, len(ts) - 1):
        touch = float(ts[j])
    else:
        bracket_lo, bracket_hi = ts[j - 1], ts[j + 1]
        touch, _ = golden_max(slope, bracket_lo, bracket_hi, tol)
        if slope(ts[j]) >= slope(touch):
            touch = float(ts[j])
    return TangencyResult(touch=touch, slope=sign * slope(touch), degenerate=degenerate)


def bisect_root(fn, lo, hi, tol=1e-12, max_iter=200):
    """Root of ``fn`` on a bracketing interval, by bisection."""
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise ValueError(f"no sign change on [{lo}, {hi}]: f={f_lo}, {f_hi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0 or hi - lo < tol:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def chord_crossing(f, g, a, b, tol=1e-12):
    """Crossing of two functions on [a, b] when f-g changes sign; None when
    it does not (reported, not raised)."""

    def diff(x):
        return f(x) - g(x)

    da, db = diff(a), diff(b)
    if da == 0.0:
        return a
    if db == 0.0:
        return b
    if da * db > 0.0:
        return None
    return bisect_root(diff, a, b, tol)
