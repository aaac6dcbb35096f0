import numpy as np
import pytest

from infopolicy import AnticipationCurve, InterimSolver, ModelParams, reacts_to_fear
from infopolicy.oracle import random_instance


@pytest.fixture
def baseline():
    """Work-horse instance: treat cap at 0.7, fear reaction under any
    concave curve."""
    return ModelParams(
        alpha=0.3, p_treated=0.9, p_good=0.7, p_bad=0.2, cost=0.35, prior=0.5
    )


@pytest.fixture
def linear():
    return AnticipationCurve.linear()


@pytest.fixture
def bendy():
    """Concave enough to make the binding regions nondegenerate."""
    return AnticipationCurve.exponential(6.0)


@pytest.fixture
def comfy():
    """(params, curve) with fear, an interior comfort tangency, and all
    three signal regions present: a thin treatment surplus keeps the
    silent value low enough for the tangent to land inside (cap, 1)."""
    params = ModelParams(
        alpha=0.2, p_treated=0.8, p_good=0.78, p_bad=0.02, cost=0.5, prior=0.5
    )
    return params, AnticipationCurve.exponential(4.0)


def with_prior(params, prior):
    return ModelParams(
        alpha=params.alpha, p_treated=params.p_treated, p_good=params.p_good,
        p_bad=params.p_bad, cost=params.cost, prior=prior,
    )


def strictly_concave_instance(rng):
    """Random instance drawn from strictly concave families only."""
    return random_instance(rng, families=("power", "exponential"))


def comfort_band_instance(rng, max_tries=500):
    """Fear instance with a wide binding perfect-bad-news region: a thin
    treatment surplus keeps the silent value low, so comfort has room."""
    for _ in range(max_tries):
        alpha = rng.uniform(0.1, 0.35)
        p_treated = rng.uniform(0.7, 0.95)
        p_good = p_treated - rng.uniform(0.01, 0.06)
        p_bad = rng.uniform(0.0, 0.12)
        cap = rng.uniform(0.25, 0.55)
        cost = p_treated - p_bad - cap * (p_good - p_bad)
        try:
            params = ModelParams(
                alpha=alpha, p_treated=p_treated, p_good=p_good, p_bad=p_bad,
                cost=cost, prior=rng.uniform(0.1, 0.9),
            )
        except ValueError:
            continue
        curve = AnticipationCurve.exponential(rng.uniform(3.0, 6.0))
        if not reacts_to_fear(params, curve):
            continue
        solver = InterimSolver(params, curve)
        th = solver.thresholds()
        if (th.persuade_hi is not None and th.disclose_cap is not None
                and th.persuade_hi - th.disclose_cap > 5e-3):
            return params, curve, solver
    raise RuntimeError("no comfort-band instance found")


def committed_comfort_instance(rng, max_tries=6000):
    """Non-fear instance whose persuadable band is nonempty and wide."""
    for _ in range(max_tries):
        params, curve = random_instance(rng, families=("power", "exponential"))
        if reacts_to_fear(params, curve):
            continue
        solver = InterimSolver(params, curve)
        th = solver.thresholds()
        if th.persuade_hi is not None and th.persuade_hi - th.persuade_lo > 0.05:
            return params, curve, solver
    raise RuntimeError("no committed-comfort instance found")


def inverse_s_instance(rng):
    """Instance with a kinked curve whose convex stretch crosses the
    untreated-recovery range, the setting where three-atom signals appear.

    Half the draws come from the thin-treatment-region profile where such
    signals are common (small treatment cap, kink high in the range); the
    rest are unrestricted."""
    if rng.random() < 0.5:
        alpha = rng.uniform(0.1, 0.6)
        p_bad = rng.uniform(0.0, 0.3)
        p_good = rng.uniform(p_bad + 0.2, 0.9)
        p_treated = rng.uniform(p_good + 0.05, 1.0)
        cap = rng.uniform(0.1, 0.2)
        cost = p_treated - p_bad - cap * (p_good - p_bad)
        params = ModelParams(
            alpha=alpha, p_treated=p_treated, p_good=p_good, p_bad=p_bad,
            cost=cost, prior=rng.uniform(0.1, 0.9),
        )
        kink_lo, kink_hi = 0.4, 0.9
    else:
        params, _ = random_instance(rng, families=("power",))
        kink_lo, kink_hi = 0.1, 0.9
    lo = params.p_treated - params.cost
    hi = params.p_good
    kink = lo + rng.uniform(kink_lo, kink_hi) * (hi - lo)
    curve = AnticipationCurve.inverse_s(
        kink=kink,
        bend_in=rng.uniform(0.3, 0.7),
        bend_out=rng.uniform(2.0, 6.0),
    )
    return params, curve
