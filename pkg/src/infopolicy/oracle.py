"""Independent verification: brute-force signal search, a full game
simulator, and the slope criterion behind the best-good-news rule.

Nothing here reuses solver internals beyond the payoff primitives, so
agreement between the two paths is evidence, not tautology.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backends

from .model import (
    AnticipationCurve,
    ModelParams,
    PolicyReport,
    PosteriorLottery,
    treat_cap,
)

__all__ = [
    "OracleResult",
    "grid_signal_oracle",
    "simulate_health",
    "best_good_news_criterion",
    "max_feasible_upper",
    "random_instance",
    "random_curve",
]

NEG_INF = -1e300


@dataclass(frozen=True)
class OracleResult:
    best_value: float
    best_signal: PosteriorLottery | None
    feasible_count: int
    grid_n: int

    @property
    def feasible(self) -> bool:
        return self.best_signal is not None


def grid_signal_oracle(prior, doctor_fn, accept_fn, rhs, grid_n=801,
                       max_atoms=2, feas_tol=1e-12) -> OracleResult:
    """Best Bayes-plausible lottery with atoms on a uniform grid and at most
    ``max_atoms`` support points, subject to E[accept_fn] >= rhs.

    The no-information lottery at the exact prior is always a candidate.
    Deterministic; the search order fixes tie-breaks."""
    if max_atoms not in (1, 2, 3):
        raise ValueError(f"max_atoms must be 1, 2 or 3, got {max_atoms}")
    if max_atoms == 3 and grid_n > 401:
        raise ValueError("3-atom search is O(n^3); keep grid_n <= 401")
    if max_atoms == 2 and grid_n > 4001:
        raise ValueError("2-atom search is O(n^2); keep grid_n <= 4001")
    grid = np.linspace(0.0, 1.0, grid_n)
    pv = np.asarray(doctor_fn(grid), dtype=float)
    vv = np.asarray(accept_fn(grid), dtype=float)

    best_value = NEG_INF
    best_atoms = None
    count = 0

    if float(accept_fn(prior)) >= rhs - feas_tol:
        best_value = float(doctor_fn(prior))
        best_atoms = [(prior, 1.0)]
        count += 1

    if max_atoms >= 2:
        lo_mask = grid < prior
        hi_mask = grid > prior
        ys, xs = grid[lo_mask], grid[hi_mask]
        val, i, j, n_feas = backends.best_pair(
            ys, xs, pv[lo_mask], pv[hi_mask], vv[lo_mask], vv[hi_mask],
            prior, rhs, feas_tol,
        )
        count += n_feas
        if n_feas > 0 and val > best_value:
            best_value = val
            best_atoms = _pair_atoms(prior, ys[i], xs[j])

    if max_atoms >= 3:
        val, i, j, k, t, n_feas = backends.best_triple(
            grid, pv, vv, prior, rhs, feas_tol
        )
        count += n_feas
        if n_feas > 0 and val > best_value:
            best_value = val
            best_atoms = _triple_atoms(prior, grid, i, j, k, t)

    if best_atoms is None:
        return OracleResult(NEG_INF, None, 0, grid_n)
    lottery = PosteriorLottery.of(best_atoms, prior=prior)
    exact = lottery.expect(doctor_fn)
    return OracleResult(float(exact), lottery, count, grid_n)


def _pair_atoms(prior, y, x):
    w = (x - prior) / (x - y)
    return [(y, w), (x, 1.0 - w)]


def _triple_atoms(prior, grid, i, j, k, t):
    a, c = grid[i], grid[k]
    denom = c - a
    if j < 0:
        return _pair_atoms(prior, a, c)
    b = grid[j]
    wa = ((c - prior) - t * (c - b)) / denom
    wc = ((prior - a) - t * (b - a)) / denom
    return [(a, wa), (b, t), (c, wc)]


# ---------------------------------------------------------------------
# game simulator
# ---------------------------------------------------------------------


def _draw_atoms(rng, lottery: PosteriorLottery, state_good, prior):
    """Vectorized draw of a message atom conditional on the true scenario."""
    mus = np.array(lottery.support)
    ws = np.array(lottery.weights)
    if prior <= 0.0 or prior >= 1.0:
        probs_good = ws
        probs_bad = ws
    else:
        probs_good = ws * mus / prior
        probs_bad = ws * (1.0 - mus) / (1.0 - prior)
    cum_good = np.cumsum(probs_good)
    cum_bad = np.cumsum(probs_bad)
    cum_good[-1] = cum_bad[-1] = 1.0
    u = rng.random(state_good.shape[0])
    idx_good = np.searchsorted(cum_good, u, side="right")
    idx_bad = np.searchsorted(cum_bad, u, side="right")
    idx = np.where(state_good, idx_good, idx_bad)
    return np.clip(idx, 0, len(mus) - 1)


def simulate_health(policy: PolicyReport, params: ModelParams,
                    curve: AnticipationCurve, n_draws: int, seed: int):
    """Play the game ``n_draws`` times and estimate the final health
    probability.  The patient's choices are re-derived from the committed
    lotteries (ties break toward testing and treating), never trusted from
    the solver.  Returns (estimate, standard error)."""
    from .model import skip_value, accept_value

    if n_draws < 1:
        raise ValueError(f"n_draws must be positive, got {n_draws}")
    if abs(policy.ex_ante.mean - params.prior) > 1e-8:
        raise ValueError("opening lottery is not Bayes-plausible at the prior")
    rng = np.random.default_rng(seed)
    cap = treat_cap(params)

    atoms = list(policy.ex_ante)
    accept_sigs = [policy.accept_lottery(mu) for mu, _ in atoms]
    reject_sigs = [policy.reject_lottery(mu) for mu, _ in atoms]
    accepts = []
    # optimal policies sit exactly on indifference, so the tie-break
    # toward testing needs room for one rounding error
    for (mu, _), acc, rej in zip(atoms, accept_sigs, reject_sigs):
        gain = acc.expect(lambda m: accept_value(m, params, curve))
        stay = rej.expect(lambda m: skip_value(m, params, curve))
        accepts.append(gain >= stay - 1e-12)

    state_good = rng.random(n_draws) < params.prior
    msg = _draw_atoms(rng, policy.ex_ante, state_good, params.prior)
    benign = rng.random(n_draws) < params.alpha

    p_true = np.where(state_good, params.p_good, params.p_bad)
    prob = np.where(benign, 1.0, p_true)  # default: untested or untreated

    for i, (mu, _) in enumerate(atoms):
        here = msg == i
        if not np.any(here) or not accepts[i]:
            continue
        sick_here = here & ~benign
        post = _draw_atoms(rng, accept_sigs[i], state_good[sick_here], mu)
        nu = np.array(accept_sigs[i].support)[post]
        treated = nu <= cap + 1e-12
        p_here = np.where(treated, params.p_treated, p_true[sick_here])
        prob[sick_here] = p_here

    healthy = rng.random(n_draws) < prob
    est = float(np.mean(healthy))
    se = float(np.sqrt(max(est * (1.0 - est), 1e-12) / n_draws))
    return est, se


# ---------------------------------------------------------------------
# best-good-news slope criterion
# ---------------------------------------------------------------------


def _fd_slope(fn, x, step=1e-6, kinks=(), lo=0.0, hi=1.0):
    """Finite-difference slope, one-sided away from kinks and endpoints."""
    near_kink = any(abs(x - k) < 1e-4 for k in kinks)
    side = 0
    if near_kink:
        side = 1 if all(x >= k for k in kinks if abs(x - k) < 1e-4) else -1
    if x - step < lo:
        side = 1
    if x + step > hi:
        side = -1
    if side == 1:
        return (fn(x + step) - fn(x)) / step
    if side == -1:
        return (fn(x) - fn(x - step)) / step
    return (fn(x + step) - fn(x - step)) / (2.0 * step)


def best_good_news_criterion(x, doctor_fn, accept_fn, d_solver, step=1e-6,
                             kinks=()):
    """Evaluate the slope inequality that makes raising the optimistic atom
    profitable while the constraint binds.

    ``d_solver(x)`` must return the best binding pessimistic atom, or None
    when none exists.  Returns (holds, lhs, rhs); holds is None when the
    binding atom is undefined."""
    d = d_solver(x)
    if d is None:
        return None, np.nan, np.nan
    sp = (doctor_fn(x) - doctor_fn(d)) / (x - d)
    sv = (accept_fn(x) - accept_fn(d)) / (x - d)
    dpx = _fd_slope(doctor_fn, x, step, kinks)
    dpd = _fd_slope(doctor_fn, d, step, kinks)
    dvx = _fd_slope(accept_fn, x, step, kinks)
    dvd = _fd_slope(accept_fn, d, step, kinks)
    denom = sv - dvd
    if abs(denom) < 1e-14:
        return None, np.nan, np.nan
    lhs = sp - dpx
    rhs = (sv - dvx) / denom * (sp - dpd)
    scale = 1.0 + abs(lhs) + abs(rhs)
    return lhs <= rhs + 1e-9 * scale, float(lhs), float(rhs)


def max_feasible_upper(feasible, lo, hi, tol=1e-10):
    """Largest x in [lo, hi] passing the monotone feasibility test: the
    caller guarantees feasibility holds below some boundary and fails
    above it.  None when nothing is feasible."""
    if feasible(hi):
        return hi
    if not feasible(lo):
        return None
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if feasible(mid):
            a = mid
        else:
            b = mid
    return a


# ---------------------------------------------------------------------
# randomized instances
# ---------------------------------------------------------------------

CONCAVE_FAMILIES = ("linear", "power", "exponential")


def random_curve(rng, families=CONCAVE_FAMILIES) -> AnticipationCurve:
    fam = families[rng.integers(len(families))]
    if fam == "linear":
        return AnticipationCurve.linear()
    if fam == "power":
        return AnticipationCurve.power(rng.uniform(0.3, 0.95))
    if fam == "exponential":
        return AnticipationCurve.exponential(rng.uniform(0.5, 4.0))
    if fam == "inverse_s":
        return AnticipationCurve.inverse_s(
            kink=rng.uniform(0.25, 0.75),
            bend_in=rng.uniform(0.4, 0.8),
            bend_out=rng.uniform(1.5, 3.0),
        )
    if fam == "tabulated":
        n = int(rng.integers(3, 7))
        vs = np.sort(rng.uniform(0.05, 0.95, n))
        ws = np.sort(rng.uniform(0.05, 0.95, n))
        ws = np.maximum(ws, vs)  # lean concave
        knots = [(0.0, 0.0)] + list(zip(vs, ws)) + [(1.0, 1.0)]
        try:
            return AnticipationCurve.tabulated(knots)
        except ValueError:
            return AnticipationCurve.power(0.6)
    raise ValueError(f"unknown family {fam}")


def random_instance(rng, families=CONCAVE_FAMILIES, fear=None, max_tries=400):
    """Random valid instance; every belief region is exercised and kinks
    stay away from degeneracy.  ``fear`` filters on the fear reaction."""
    from .model import reacts_to_fear

    for _ in range(max_tries):
        alpha = rng.uniform(0.05, 0.95)
        p_bad = rng.uniform(0.0, 0.5)
        p_good = rng.uniform(p_bad + 0.1, 0.9)
        p_treated = rng.uniform(p_good + 0.05, 1.0)
        cap = rng.uniform(0.1, 0.9)
        cost = p_treated - p_bad - cap * (p_good - p_bad)
        prior = rng.uniform(0.05, 0.95)
        params = ModelParams(
            alpha=alpha, p_treated=p_treated, p_good=p_good, p_bad=p_bad,
            cost=cost, prior=prior,
        )
        curve = random_curve(rng, families)
        if fear is not None and reacts_to_fear(params, curve) is not fear:
            continue
        return params, curve
    raise RuntimeError(f"no instance with fear={fear} found in {max_tries} tries")
