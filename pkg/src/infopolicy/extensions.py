"""Variant models sharing the best-good-news machinery.

* fee model      -- no anticipatory distortion, but taking the test costs a
                    flat fee; payoffs here are conditional on a bad result,
                    which makes every threshold a ratio of the primitives.
* test design    -- the disclosure is about the test result itself; the
                    patient's payoff has two concave pieces with a convex
                    kink at the treatment threshold.
* cost example   -- binary-cost action problem with a testing fee and a
                    step sender payoff; the optimal signal is closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envelope import bisect_root, concave_envelope, golden_max, tangent_from_point
from .interim import InterimSolution
from .model import (
    AnticipationCurve,
    ModelParams,
    PosteriorLottery,
    Regime,
    Region,
)

__all__ = [
    "FeeModelParams",
    "fee_caps",
    "solve_fee_interim",
    "solve_fee_model",
    "ScreenDesignParams",
    "screen_design_thresholds",
    "best_lower_belief",
    "ScreenDesignSolution",
    "solve_screen_design",
    "CostExampleParams",
    "solve_cost_example",
]


# ---------------------------------------------------------------------
# fee model
# ---------------------------------------------------------------------


@dataclass(frozen=True)
class FeeModelParams:
    """Linear-curve benchmark where the test costs a flat ``fee``."""

    base: ModelParams
    fee: float

    def __post_init__(self):
        if self.fee < 0.0:
            raise ValueError(f"fee must be nonnegative, got {self.fee}")


def fee_caps(fp: FeeModelParams):
    """(no-disclosure cap, persuadable cap) of the interim belief.

    Both are the beliefs where the patient is exactly indifferent: the
    first under silence, the second under full disclosure."""
    p = fp.base
    net = p.p_treated - p.cost
    guide = (net - fp.fee - p.p_bad) / (p.p_good - p.p_bad)
    persuade = (net - fp.fee - p.p_bad) / (net - p.p_bad)
    return guide, persuade


def _fee_lower(mu, fp):
    p = fp.base
    net = p.p_treated - p.cost
    return ((1.0 - mu) * (net - p.p_bad) - fp.fee) / (
        (1.0 - mu) * (p.p_good - p.p_bad) - fp.fee
    )


def solve_fee_interim(mu, fp: FeeModelParams) -> InterimSolution:
    """Optimal signal at an interim belief in the fee model.  Values are
    conditional on a bad test result, in recovery-probability units."""
    p = fp.base
    net = p.p_treated - p.cost
    guide, persuade = fee_caps(fp)

    def tested(m):
        return net if m <= (net - p.p_bad) / (p.p_good - p.p_bad) else _untr(m, p)

    def recovery(m):
        return p.p_treated if m <= (net - p.p_bad) / (p.p_good - p.p_bad) else _untr(m, p)

    outside = _untr(mu, p)
    if mu <= guide:
        lottery = PosteriorLottery.point(mu)
        region = Region.GUIDE
        accepts = True
    elif mu <= persuade:
        lottery = PosteriorLottery.binary(mu, _fee_lower(mu, fp), 1.0)
        region = Region.WARN
        accepts = True
    else:
        lottery = PosteriorLottery.point(mu)
        region = Region.REFUSE
        accepts = False
    accept_value = lottery.expect(tested) - fp.fee
    if accepts:
        doctor = p.alpha + (1.0 - p.alpha) * lottery.expect(recovery)
        patient = accept_value
    else:
        doctor = p.alpha + (1.0 - p.alpha) * _untr(mu, p)
        patient = outside
    return InterimSolution(
        prior=mu,
        region=region,
        accept_signal=lottery,
        reject_signal=PosteriorLottery.binary(mu, 0.0, 1.0),
        accepts=accepts,
        doctor_value=float(doctor),
        patient_value=float(patient),
        pc_slack=float(accept_value - outside),
    )


def _untr(mu, p: ModelParams):
    return p.p_bad + (p.p_good - p.p_bad) * mu


def solve_fee_model(fp: FeeModelParams):
    """Optimal opening signal of the fee model: warn down to the cap where
    silence still gets the patient tested."""
    from .exante import ExAnteSolution

    p = fp.base
    guide, persuade = fee_caps(fp)
    mu0 = p.prior
    if guide <= 0.0:
        lottery = PosteriorLottery.point(mu0)
        regime = Regime.UNABLE_TO_PERSUADE
    elif mu0 <= guide:
        lottery = PosteriorLottery.point(mu0)
        regime = Regime.NO_DISCLOSURE_NEEDED
    else:
        lottery = PosteriorLottery.binary(mu0, guide, 1.0)
        regime = Regime.PREEMPTIVE_WARNING
    interim = tuple((mu, solve_fee_interim(mu, fp)) for mu, _ in lottery)
    doctor = sum(w * sol.doctor_value for (_, w), (_, sol) in zip(lottery, interim))
    patient = sum(w * sol.patient_value for (_, w), (_, sol) in zip(lottery, interim))
    return ExAnteSolution(lottery, interim, regime, float(doctor), float(patient))


# ---------------------------------------------------------------------
# test design
# ---------------------------------------------------------------------


@dataclass(frozen=True)
class ScreenDesignParams:
    """Disclosure about the test result itself; beliefs are the chance the
    symptom is benign, and pessimism is what triggers treatment."""

    alpha0: float
    p_treated: float
    p_untreated: float
    cost: float
    curve: AnticipationCurve

    def __post_init__(self):
        if not 0.0 < self.alpha0 < 1.0:
            raise ValueError(f"alpha0 must lie in (0,1), got {self.alpha0}")
        if not 0.0 <= self.p_untreated < self.p_treated <= 1.0:
            raise ValueError("need 0 <= p_untreated < p_treated <= 1")
        if self.cost <= 0.0 or self.p_treated - self.p_untreated < self.cost:
            raise ValueError("need 0 < cost <= p_treated - p_untreated")

    @property
    def treat_cap(self) -> float:
        return 1.0 - self.cost / (self.p_treated - self.p_untreated)


def _td_value(alpha, tp: ScreenDesignParams):
    """Patient's anticipated utility at posterior ``alpha``."""
    a = np.asarray(alpha, dtype=float)
    treated = tp.curve(a + (1.0 - a) * tp.p_treated - tp.cost)
    untreated = tp.curve(a + (1.0 - a) * tp.p_untreated)
    out = np.where(a <= tp.treat_cap, treated, untreated)
    return float(out) if np.ndim(alpha) == 0 else out


def _td_health(alpha, tp: ScreenDesignParams):
    a = np.asarray(alpha, dtype=float)
    rec = np.where(a <= tp.treat_cap, tp.p_treated, tp.p_untreated)
    out = a + (1.0 - a) * rec
    return float(out) if np.ndim(alpha) == 0 else out


def best_lower_belief(alpha, tp: ScreenDesignParams) -> float:
    """Pessimistic atom whose chord from (alpha, value) supports the
    pre-threshold branch from above; ties go to the largest, corners
    allowed.  This is the patient-optimal lower atom for a fixed upper
    one."""
    cap = tp.treat_cap
    tan = tangent_from_point(
        lambda t: _td_value(t, tp), (alpha, _td_value(alpha, tp)), 0.0, cap,
        minimize=True,
    )
    return tan.touch


def screen_design_thresholds(tp: ScreenDesignParams, grid_n=4001):
    """(treat cap, good-news cap, reward cap): persuasion helps only
    between the first and third; the plain full-good-news signal works up
    to the second."""
    cap = tp.treat_cap
    value = lambda a: _td_value(a, tp)
    env = concave_envelope(value, 0.0, 1.0, grid_n, knots=(cap,))
    bridge = env.bridge_at(min(max(cap, env.grid[1]), env.grid[-2]))
    if bridge is None:
        reward_cap = cap
        degenerate = True
    else:
        lo_t, hi_t = bridge
        degenerate = False
        # polish the bitangent by alternating supporting tangencies
        for _ in range(4):
            if hi_t <= cap + 1e-12:
                break
            lo_t = tangent_from_point(
                value, (hi_t, value(hi_t)), 0.0, cap, minimize=True
            ).touch
            hi_t = tangent_from_point(value, (lo_t, value(lo_t)), cap, 1.0).touch
        reward_cap = hi_t
    l1 = best_lower_belief(1.0, tp)

    def chord_gap(a):
        w = (1.0 - a) / (1.0 - l1)
        return w * value(l1) + (1.0 - w) * value(1.0) - value(a)

    if chord_gap(cap) <= 0.0:
        goodnews_cap = cap
    else:
        x_min, neg_min = golden_max(lambda a: -chord_gap(a), cap, 1.0)
        if -neg_min < -1e-13:
            goodnews_cap = bisect_root(chord_gap, cap, x_min)
        else:
            goodnews_cap = 1.0
    return cap, goodnews_cap, reward_cap, degenerate


@dataclass(frozen=True)
class ScreenDesignSolution:
    prior: float
    signal: PosteriorLottery
    benefits: bool
    upper: float
    lower: float
    bad_news_prob: float
    doctor_value: float
    patient_value: float
    pc_slack: float
    boundary: bool = False


def solve_screen_design(tp: ScreenDesignParams, thresholds=None) -> ScreenDesignSolution:
    """Optimal revelation of the test result under voluntary testing.

    ``thresholds`` takes a precomputed ``screen_design_thresholds`` tuple;
    sweeps over the prior reuse it since it does not depend on alpha0."""
    a0 = tp.alpha0
    cap, goodnews_cap, reward_cap, degenerate = (
        thresholds if thresholds is not None else screen_design_thresholds(tp)
    )
    value = lambda a: _td_value(a, tp)
    health = lambda a: _td_health(a, tp)
    outside = value(a0)

    def no_info(boundary=False):
        sig = PosteriorLottery.point(a0)
        return ScreenDesignSolution(
            prior=a0, signal=sig, benefits=False, upper=a0, lower=a0,
            bad_news_prob=0.0, doctor_value=health(a0), patient_value=outside,
            pc_slack=0.0, boundary=boundary,
        )

    if a0 <= cap or degenerate:
        return no_info()
    if a0 >= reward_cap:
        return no_info(boundary=abs(a0 - reward_cap) < 1e-9)

    if a0 <= goodnews_cap:
        lower, upper = best_lower_belief(1.0, tp), 1.0
    else:
        lower = best_lower_belief(a0, tp)
        slope = (value(a0) - value(lower)) / (a0 - lower)

        def line_gap(a):
            return value(a) - (value(a0) + slope * (a - a0))

        if line_gap(1.0) >= 0.0:
            upper = 1.0
        else:
            peak, peak_val = golden_max(line_gap, a0, 1.0)
            if peak_val <= 0.0:
                upper = 1.0
            else:
                upper = bisect_root(line_gap, peak, 1.0)
    sig = PosteriorLottery.binary(a0, lower, upper)
    ev = sig.expect(value)
    doctor = sig.expect(health)
    return ScreenDesignSolution(
        prior=a0,
        signal=sig,
        benefits=doctor > health(a0) + 1e-12,
        upper=upper,
        lower=lower,
        bad_news_prob=(upper - a0) / (upper - lower),
        doctor_value=float(doctor),
        patient_value=float(ev),
        pc_slack=float(ev - outside),
    )


# ---------------------------------------------------------------------
# cost example
# ---------------------------------------------------------------------


@dataclass(frozen=True)
class CostExampleParams:
    """Binary-cost action problem: the receiver acts iff they believe the
    cost is low enough, and testing costs ``fee``."""

    cost_high: float
    cost_low: float
    prior_high: float
    fee: float
    payoff_action: float = 1.0
    payoff_inaction: float = 0.0

    def __post_init__(self):
        if not self.cost_high > 1.0 > self.cost_low >= 0.0:
            raise ValueError("need cost_high > 1 > cost_low >= 0")
        if not 0.0 < self.prior_high < 1.0:
            raise ValueError(f"prior_high must lie in (0,1), got {self.prior_high}")
        if self.fee < 0.0:
            raise ValueError(f"fee must be nonnegative, got {self.fee}")
        if self.payoff_action < self.payoff_inaction:
            raise ValueError("sender must prefer action")

    @property
    def act_cap(self) -> float:
        return (1.0 - self.cost_low) / (self.cost_high - self.cost_low)


def cost_example_value(u, ce: CostExampleParams):
    """Receiver's value of acting optimally at belief ``u`` (fee aside)."""
    u_a = np.asarray(u, dtype=float)
    gain = 1.0 - (u_a * ce.cost_high + (1.0 - u_a) * ce.cost_low)
    out = np.where(u_a <= ce.act_cap, gain, 0.0)
    return float(out) if np.ndim(u) == 0 else out


@dataclass(frozen=True)
class CostExampleSolution:
    signal: PosteriorLottery
    persuades: bool
    lower: float
    sender_value: float
    pc_residual: float


def solve_cost_example(ce: CostExampleParams) -> CostExampleSolution:
    """Closed-form optimal signal: perfect good news whose lower atom makes
    the testing fee exactly worth paying."""
    u0 = ce.prior_high
    if u0 < ce.act_cap:
        raise ValueError(
            f"prior {u0} below the action cap {ce.act_cap}; no persuasion needed"
        )
    num = (1.0 - u0) * (1.0 - ce.cost_low) - ce.fee
    den = (1.0 - u0) * (ce.cost_high - ce.cost_low) - ce.fee
    if num <= 0.0 or den <= 0.0:
        return CostExampleSolution(
            signal=PosteriorLottery.point(u0),
            persuades=False,
            lower=u0,
            sender_value=ce.payoff_inaction,
            pc_residual=0.0,
        )
    lower = num / den
    sig = PosteriorLottery.binary(u0, lower, 1.0)
    w_low = sig.weights[0] if len(sig) == 2 else 0.0
    sender = w_low * ce.payoff_action + (1.0 - w_low) * ce.payoff_inaction
    residual = w_low * (1.0 - lower * ce.cost_high - (1.0 - lower) * ce.cost_low) - ce.fee
    return CostExampleSolution(
        signal=sig,
        persuades=True,
        lower=lower,
        sender_value=float(sender),
        pc_residual=float(residual),
    )
