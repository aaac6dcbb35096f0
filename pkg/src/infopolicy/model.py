"""Model primitives: parameters, anticipation curves, payoffs, belief lotteries.

The receiver ("patient") shows a preliminary symptom that is benign with
probability ``alpha``.  If it is not benign, recovery happens with
probability ``p_treated`` under treatment, and with probability ``p_good``
or ``p_bad`` without treatment, depending on an unknown binary scenario.
Beliefs are probabilities of the good scenario.  The patient's felt utility
today is a strictly increasing distortion (an :class:`AnticipationCurve`)
of tomorrow's recovery odds, which is what makes information itself
pleasant or painful and drives every threshold in the solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "ModelParams",
    "AnticipationCurve",
    "PosteriorLottery",
    "Thresholds",
    "Regime",
    "Region",
    "PolicyReport",
    "untreated_recovery",
    "treat_cap",
    "sick_recovery",
    "accept_value",
    "skip_value",
    "skip_value_revealed",
    "consult_value",
    "reacts_to_fear",
    "fear_criterion_slack",
]

PROB_TOL = 1e-12
MEAN_TOL = 1e-10


def _match(template, out):
    """Return a float for scalar input, an array otherwise."""
    if np.ndim(template) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class ModelParams:
    """Primitive parameters of the disclosure model.

    alpha      -- probability the symptom is benign
    p_treated  -- recovery probability if sick and treated
    p_good     -- recovery probability if sick, untreated, good scenario
    p_bad      -- recovery probability if sick, untreated, bad scenario
    cost       -- treatment cost, in recovery-probability units
    prior      -- prior probability of the good scenario
    """

    alpha: float
    p_treated: float
    p_good: float
    p_bad: float
    cost: float
    prior: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0,1), got {self.alpha}")
        if not 0.0 < self.prior < 1.0:
            raise ValueError(f"prior must lie in (0,1), got {self.prior}")
        if not 0.0 <= self.p_bad < self.p_good < self.p_treated <= 1.0:
            raise ValueError(
                "need 0 <= p_bad < p_good < p_treated <= 1, got "
                f"p_bad={self.p_bad}, p_good={self.p_good}, p_treated={self.p_treated}"
            )
        if self.cost <= 0.0:
            raise ValueError(f"cost must be positive, got {self.cost}")
        net = self.p_treated - self.cost
        if not self.p_bad < net < self.p_good:
            raise ValueError(
                "treatment must dominate only for pessimistic beliefs: "
                f"need p_bad < p_treated-cost < p_good, got {net}"
            )


def treat_cap(params: ModelParams) -> float:
    """Largest belief at which the patient accepts treatment."""
    return (params.p_treated - params.cost - params.p_bad) / (
        params.p_good - params.p_bad
    )


def untreated_recovery(mu, params: ModelParams):
    """Recovery probability without treatment, affine in the belief."""
    mu_a = np.asarray(mu, dtype=float)
    return _match(mu, params.p_bad + (params.p_good - params.p_bad) * mu_a)


def sick_recovery(mu, params: ModelParams):
    """Recovery probability after a bad test result, given the patient's
    treatment choice at belief ``mu`` (ties break toward treating)."""
    mu_a = np.asarray(mu, dtype=float)
    out = np.where(
        mu_a <= treat_cap(params),
        params.p_treated,
        params.p_bad + (params.p_good - params.p_bad) * mu_a,
    )
    return _match(mu, out)


class AnticipationCurve:
    """Strictly increasing distortion of date-2 utility, normalized so that
    phi(0) = 0 and phi(1) = 1.

    Families:
      linear                    -- identity (information-neutral)
      power(gamma)              -- v**gamma, concave for gamma < 1
      exponential(rate)         -- (1-exp(-rate*v)) / (1-exp(-rate)), concave
      inverse_s(kink, ...)      -- concave below the kink, convex above it
      tabulated(knots)          -- monotone piecewise-linear through knots
    """

    def __init__(self, family, **kw):
        self.family = family
        self.kw = dict(kw)
        if family == "linear":
            self.shape = "linear"
        elif family == "power":
            g = kw["gamma"]
            if not 0.0 < g <= 1.0:
                raise ValueError(f"power exponent must lie in (0,1], got {g}")
            self.shape = "linear" if g == 1.0 else "concave"
        elif family == "exponential":
            k = kw["rate"]
            if k <= 0.0:
                raise ValueError(f"exponential rate must be positive, got {k}")
            self.shape = "concave"
        elif family == "inverse_s":
            v = self.kw["kink"]
            if not 0.0 < v < 1.0:
                raise ValueError(f"kink must lie in (0,1), got {v}")
            a = self.kw.setdefault("bend_in", 0.5)
            b = self.kw.setdefault("bend_out", 2.0)
            y = self.kw.setdefault("kink_value", v**a)
            if not (0.0 < a < 1.0 and b > 1.0):
                raise ValueError("need bend_in in (0,1) and bend_out > 1")
            if not 0.0 < y < 1.0:
                raise ValueError(f"kink_value must lie in (0,1), got {y}")
            self.shape = "mixed"
        elif family == "tabulated":
            knots = [(float(v), float(w)) for v, w in kw["knots"]]
            if len(knots) < 2:
                raise ValueError("tabulated curve needs at least 2 knots")
            if knots[0] != (0.0, 0.0):
                raise ValueError("knot 0 must be (0, 0)")
            if knots[-1] != (1.0, 1.0):
                raise ValueError(f"knot {len(knots) - 1} must be (1, 1)")
            for i in range(1, len(knots)):
                if knots[i][0] <= knots[i - 1][0] or knots[i][1] <= knots[i - 1][1]:
                    raise ValueError(f"knot {i} is not strictly increasing")
            self._kv = np.array([k[0] for k in knots])
            self._kw = np.array([k[1] for k in knots])
            self.kw["knots"] = knots
            d2 = np.diff(np.diff(self._kw) / np.diff(self._kv))
            self.shape = "concave" if np.all(d2 <= 1e-12) else "mixed"
        else:
            raise ValueError(f"unknown curve family {family!r}")

    # -- constructors ---------------------------------------------------

    @classmethod
    def linear(cls):
        return cls("linear")

    @classmethod
    def power(cls, gamma):
        return cls("power", gamma=float(gamma))

    @classmethod
    def exponential(cls, rate):
        return cls("exponential", rate=float(rate))

    @classmethod
    def inverse_s(cls, kink, kink_value=None, bend_in=0.5, bend_out=2.0):
        kw = dict(kink=float(kink), bend_in=float(bend_in), bend_out=float(bend_out))
        if kink_value is not None:
            kw["kink_value"] = float(kink_value)
        return cls("inverse_s", **kw)

    @classmethod
    def tabulated(cls, knots):
        return cls("tabulated", knots=list(knots))

    # -- evaluation -----------------------------------------------------

    @property
    def concave(self) -> bool:
        return self.shape in ("linear", "concave")

    def __call__(self, v):
        v_a = np.asarray(v, dtype=float)
        fam = self.family
        if fam == "linear":
            out = v_a
        elif fam == "power":
            out = np.power(np.clip(v_a, 0.0, None), self.kw["gamma"])
        elif fam == "exponential":
            k = self.kw["rate"]
            out = (1.0 - np.exp(-k * v_a)) / (1.0 - math.exp(-k))
        elif fam == "inverse_s":
            t, y = self.kw["kink"], self.kw["kink_value"]
            a, b = self.kw["bend_in"], self.kw["bend_out"]
            lo = y * np.power(np.clip(v_a / t, 0.0, None), a)
            hi = y + (1.0 - y) * np.power(np.clip((v_a - t) / (1.0 - t), 0.0, None), b)
            out = np.where(v_a <= t, lo, hi)
        else:
            out = np.interp(v_a, self._kv, self._kw)
        return _match(v, out)

    def inverse(self, w: float) -> float:
        """Value v with phi(v) = w, found by bisection on [0, 1]."""
        if not -PROB_TOL <= w <= 1.0 + PROB_TOL:
            raise ValueError(f"inverse target must lie in [0,1], got {w}")
        w = min(max(w, 0.0), 1.0)
        if self.family == "tabulated":
            return float(np.interp(w, self._kw, self._kv))
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if self(mid) < w:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.kw.items() if k != "knots")
        return f"AnticipationCurve({self.family}{', ' + args if args else ''})"


# -- patient and doctor payoffs ----------------------------------------


def accept_value(mu, params: ModelParams, curve: AnticipationCurve):
    """Patient's anticipated utility after taking the test and learning he
    is sick, at posterior ``mu``."""
    mu_a = np.asarray(mu, dtype=float)
    top = curve(1.0)
    net = params.p_treated - params.cost
    treated = params.alpha * top + (1.0 - params.alpha) * curve(net)
    untreated = params.alpha * top + (1.0 - params.alpha) * curve(
        untreated_recovery(mu_a, params)
    )
    return _match(mu, np.where(mu_a <= treat_cap(params), treated, untreated))


def skip_value(mu, params: ModelParams, curve: AnticipationCurve):
    """Patient's anticipated utility when he skips the test at belief ``mu``."""
    mu_a = np.asarray(mu, dtype=float)
    inner = params.alpha + (1.0 - params.alpha) * untreated_recovery(mu_a, params)
    return _match(mu, curve(inner))


def skip_value_revealed(mu, params: ModelParams, curve: AnticipationCurve):
    """Skip value when the scenario will be fully revealed afterwards.
    Affine in the belief; the harshest credible treatment of a refusal
    when the curve is concave."""
    mu_a = np.asarray(mu, dtype=float)
    hi = curve(params.alpha + (1.0 - params.alpha) * params.p_good)
    lo = curve(params.alpha + (1.0 - params.alpha) * params.p_bad)
    return _match(mu, mu_a * hi + (1.0 - mu_a) * lo)


def consult_value(mu, params: ModelParams, curve: AnticipationCurve):
    """Patient's value of showing up when the interim stage stays silent:
    either test-and-treat on bad news alone, or stay away."""
    mu_a = np.asarray(mu, dtype=float)
    stay_away = skip_value(mu_a, params, curve)
    test_blind = accept_value(0.0, params, curve)
    return _match(mu, np.maximum(stay_away, test_blind))


def reacts_to_fear(params: ModelParams, curve: AnticipationCurve) -> bool:
    """True when the patient still takes the test at the most pessimistic
    belief; indifference counts as taking it."""
    return accept_value(0.0, params, curve) >= skip_value(0.0, params, curve)


def fear_criterion_slack(params: ModelParams, curve: AnticipationCurve) -> float:
    """Cost headroom of the fear reaction: nonnegative iff the patient
    reacts to fear.  Uses the curve inverse, so it assumes a normalized
    curve."""
    a = params.alpha
    inner = (skip_value(0.0, params, curve) - a * curve(1.0)) / (1.0 - a)
    return params.p_treated - params.cost - curve.inverse(inner)


# -- lotteries over posteriors ------------------------------------------


@dataclass(frozen=True)
class PosteriorLottery:
    """Distribution over posterior beliefs; the canonical form of a signal.

    Atoms are (posterior, weight) pairs, ascending in posterior, weights
    positive and summing to one.  Solvers emit at most three atoms; pooled
    policies may carry more.
    """

    atoms: tuple

    @classmethod
    def of(cls, pairs, prior=None):
        merged = {}
        for mu, w in pairs:
            if w < PROB_TOL:
                continue
            mu = float(mu)
            merged[mu] = merged.get(mu, 0.0) + float(w)
        if not merged:
            raise ValueError("lottery needs at least one atom with positive weight")
        atoms = tuple(sorted(merged.items()))
        total = sum(w for _, w in atoms)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {total}, not 1")
        for mu, _ in atoms:
            if not -PROB_TOL <= mu <= 1.0 + PROB_TOL:
                raise ValueError(f"posterior {mu} outside [0,1]")
        lot = cls(atoms)
        if prior is not None and abs(lot.mean - prior) > MEAN_TOL:
            raise ValueError(
                f"lottery mean {lot.mean} is not the declared prior {prior}"
            )
        return lot

    @classmethod
    def point(cls, mu):
        return cls(((float(mu), 1.0),))

    @classmethod
    def binary(cls, prior, lo, hi):
        """Bayes-plausible split of ``prior`` across ``lo`` and ``hi``."""
        if not lo - MEAN_TOL <= prior <= hi + MEAN_TOL:
            raise ValueError(f"prior {prior} outside [{lo}, {hi}]")
        if hi - lo < PROB_TOL or abs(prior - lo) < PROB_TOL or abs(prior - hi) < PROB_TOL:
            return cls.point(prior)
        w_lo = (hi - prior) / (hi - lo)
        return cls.of([(lo, w_lo), (hi, 1.0 - w_lo)], prior=prior)

    @property
    def mean(self) -> float:
        return sum(mu * w for mu, w in self.atoms)

    @property
    def support(self):
        return tuple(mu for mu, _ in self.atoms)

    @property
    def weights(self):
        return tuple(w for _, w in self.atoms)

    def expect(self, fn) -> float:
        return float(sum(w * fn(mu) for mu, w in self.atoms))

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)


# -- classification labels ----------------------------------------------


class Regime(str, Enum):
    """Which persuasion strategy the solved policy implements."""

    NO_DISCLOSURE_NEEDED = "NoDisclosureNeeded"
    PREEMPTIVE_WARNING = "PreemptiveWarning"
    COMMITTED_COMFORT = "CommittedComfort"
    PREEMPTIVE_COMFORT = "PreemptiveComfort"
    UNABLE_TO_PERSUADE = "UnableToPersuade"


class Region(str, Enum):
    """Interim-belief region determining the optimal signal's form."""

    GUIDE = "guide"        # doctor's favorite signal already keeps him testing
    WARN = "warn"          # binding constraint, perfect good news
    COMFORT = "comfort"    # binding constraint, perfect bad news
    REFUSE = "refuse"      # no signal keeps him testing


@dataclass(frozen=True)
class Thresholds:
    """All critical beliefs; None marks a threshold whose defining set is
    empty for the instance."""

    treat_cap: float
    comfort_cap: float | None = None
    guide_cap: float | None = None
    disclose_cap: float | None = None
    persuade_lo: float | None = None
    persuade_hi: float | None = None
    visit_noinfo_cap: float | None = None
    visit_disclose_cap: float | None = None
    visit_cap: float | None = None
    reacts_to_fear: bool = False
    comfort_degenerate: bool = False

    def to_dict(self):
        return {
            "treat_cap": self.treat_cap,
            "comfort_cap": self.comfort_cap,
            "guide_cap": self.guide_cap,
            "disclose_cap": self.disclose_cap,
            "persuade_lo": self.persuade_lo,
            "persuade_hi": self.persuade_hi,
            "visit_noinfo_cap": self.visit_noinfo_cap,
            "visit_disclose_cap": self.visit_disclose_cap,
            "visit_cap": self.visit_cap,
            "reacts_to_fear": self.reacts_to_fear,
        }


def _lottery_dict(lot: PosteriorLottery):
    return [{"posterior": mu, "weight": w} for mu, w in lot.atoms]


@dataclass(frozen=True)
class PolicyReport:
    """Fully solved policy: the opening lottery, the committed signal after
    each opening message for both test choices, and the accounting."""

    ex_ante: PosteriorLottery
    interim_accept: tuple    # ((atom, PosteriorLottery), ...) aligned with ex_ante
    interim_reject: tuple
    regime: Regime
    doctor_value: float
    patient_value: float
    constraint_residuals: tuple  # ((name, slack), ...)

    def accept_lottery(self, atom) -> PosteriorLottery:
        for mu, lot in self.interim_accept:
            if abs(mu - atom) < 1e-12:
                return lot
        raise KeyError(f"no interim lottery recorded for atom {atom}")

    def reject_lottery(self, atom) -> PosteriorLottery:
        for mu, lot in self.interim_reject:
            if abs(mu - atom) < 1e-12:
                return lot
        raise KeyError(f"no interim lottery recorded for atom {atom}")

    def to_dict(self):
        return {
            "regime": self.regime.value,
            "doctor_value": self.doctor_value,
            "patient_value": self.patient_value,
            "ex_ante": _lottery_dict(self.ex_ante),
            "interim_accept": [
                {"atom": mu, "signal": _lottery_dict(lot)}
                for mu, lot in self.interim_accept
            ],
            "interim_reject": [
                {"atom": mu, "signal": _lottery_dict(lot)}
                for mu, lot in self.interim_reject
            ],
            "constraint_residuals": [
                {"constraint": name, "slack": slack}
                for name, slack in self.constraint_residuals
            ],
        }
