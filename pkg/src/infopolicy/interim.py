"""Optimal disclosure after the test decision.

The solver maximizes the doctor's continuation payoff over Bayes-plausible
signals subject to the patient's willingness to take the test.  One branch
kernel covers every variant: it first tries the doctor's favorite signal,
then a binding perfect-good-news signal, then a binding perfect-bad-news
signal, and reports refusal when nothing is feasible.  The pre-test
("opt-out") problem reuses the same kernel with substituted payoffs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envelope import (
    bisect_root,
    concave_envelope,
    convex_minorant,
    golden_max,
    tangent_from_point,
)
from .model import (
    ModelParams,
    AnticipationCurve,
    PosteriorLottery,
    Region,
    Thresholds,
    reacts_to_fear,
    sick_recovery,
    skip_value,
    skip_value_revealed,
    accept_value,
    treat_cap,
    untreated_recovery,
)

__all__ = [
    "InterimSolution",
    "InterimSolver",
    "doctor_favorite_signal",
    "patient_favorite_signal",
    "solve_interim",
    "solve_interim_unconditional",
    "solve_interim_general",
    "interim_health",
    "monotonicity_report",
]

ROOT_TOL = 1e-12


@dataclass(frozen=True)
class InterimSolution:
    """Solved signal pair at one interim belief."""

    prior: float
    region: Region
    accept_signal: PosteriorLottery
    reject_signal: PosteriorLottery
    accepts: bool
    doctor_value: float
    patient_value: float
    pc_slack: float


def doctor_favorite_signal(prior, params) -> PosteriorLottery:
    """Signal maximizing the doctor's payoff with no constraint: push the
    belief to the treatment cap, balanced by certainty of the bad scenario;
    silence below the cap."""
    cap = treat_cap(params)
    if prior <= cap:
        return PosteriorLottery.point(prior)
    return PosteriorLottery.binary(prior, cap, 1.0)


def patient_favorite_signal(prior, params, curve, comfort=None) -> PosteriorLottery:
    """Signal maximizing the patient's anticipated utility: perfect bad
    news up to the comfort tangency; silence beyond it."""
    if comfort is None:
        comfort = InterimSolver(params, curve).comfort
    if prior >= comfort:
        return PosteriorLottery.point(prior)
    return PosteriorLottery.binary(prior, 0.0, comfort)


# ---------------------------------------------------------------------
# shared branch kernel
# ---------------------------------------------------------------------


def _chord_value(accept, prior, y, hi_val):
    """Patient value of the {y, 1} lottery."""
    w = (1.0 - prior) / (1.0 - y)
    return w * accept(y) + (1.0 - w) * hi_val


def _bad_news_value(accept, prior, h, lo_val):
    """Patient value of the {0, h} lottery."""
    w = prior / h
    return (1.0 - w) * lo_val + w * accept(h)


def _last_feasible(vals_fn, lo, hi, target, n=1025, tol=ROOT_TOL):
    """Largest point of [lo, hi] where ``vals_fn`` still reaches ``target``,
    located by a scan plus bisection on the final downcrossing."""
    ts = np.linspace(lo, hi, n)
    vals = np.array([vals_fn(t) for t in ts])
    ok = vals >= target
    if not ok.any():
        return None
    j = int(np.flatnonzero(ok)[-1])
    if j == n - 1:
        return float(ts[-1])
    return bisect_root(lambda t: vals_fn(t) - target, ts[j], ts[j + 1], tol)


def _binding_lower(accept, rhs, prior, kink, flat_left, tol=ROOT_TOL):
    """Lower atom of the binding {y, 1} signal: the largest y that keeps
    the patient exactly willing."""
    hi_val = accept(1.0)
    y_max = min(prior, kink)
    if flat_left:
        fd = (1.0 - prior) * accept(0.0) + prior * hi_val
        return (fd - rhs) / (hi_val - rhs)
    return _last_feasible(
        lambda y: _chord_value(accept, prior, y, hi_val), 0.0, y_max, rhs, tol=tol
    )


def _binding_upper(accept, rhs, prior, lo_bracket, concave_right, tol=ROOT_TOL):
    """Upper atom of the binding {0, h} signal: the largest h that keeps
    the patient exactly willing."""
    lo_val = accept(0.0)
    lo = max(lo_bracket, prior)

    def value(h):
        return _bad_news_value(accept, prior, h, lo_val)

    if concave_right:
        # patient value of {0, h} falls in h beyond the tangency
        f_lo = value(lo) - rhs
        if f_lo < 0.0:
            return None
        if value(1.0) >= rhs:
            return 1.0
        return bisect_root(lambda h: value(h) - rhs, lo, 1.0, tol)
    return _last_feasible(value, lo, 1.0, rhs, tol=tol)


def _bgn_solve(prior, accept, rhs, kink, comfort, flat_left=True,
               concave_right=True, tol=ROOT_TOL):
    """Branch kernel for the constrained binary-signal problem.

    accept  -- patient payoff from going ahead, flat on [0, kink] when
               ``flat_left`` and concave on [kink, 1] when ``concave_right``
    rhs     -- patient's outside value at this prior
    kink    -- belief where the downstream action flips
    comfort -- tangency cap of the patient-optimal signal (bracket for the
               bad-news branch); may be None in scan mode

    Returns (region, lottery).
    """
    hi_val = accept(1.0)

    # doctor's favorite: no information below the kink, {kink, 1} above
    if prior <= kink:
        if accept(prior) >= rhs:
            return Region.GUIDE, PosteriorLottery.point(prior)
    else:
        w = (1.0 - prior) / (1.0 - kink)
        if w * accept(kink) + (1.0 - w) * hi_val >= rhs:
            return Region.GUIDE, PosteriorLottery.binary(prior, kink, 1.0)

    # perfect good news with a binding constraint
    fd = (1.0 - prior) * accept(0.0) + prior * hi_val
    if fd >= rhs:
        y = _binding_lower(accept, rhs, prior, kink, flat_left, tol)
        if y is not None:
            y = min(max(y, 0.0), min(prior, kink))
            return Region.WARN, PosteriorLottery.binary(prior, y, 1.0)

    # perfect bad news with a binding constraint
    lo_bracket = comfort if comfort is not None else kink
    h = _binding_upper(accept, rhs, prior, lo_bracket, concave_right, tol)
    if h is not None:
        h = min(max(h, prior), 1.0)
        return Region.COMFORT, PosteriorLottery.binary(prior, 0.0, h)

    return Region.REFUSE, PosteriorLottery.point(prior)


# ---------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------


class InterimSolver:
    """Precomputes an instance's thresholds and answers per-belief queries.

    mode:
      "conditional"    -- the signal after refusal may differ (full
                          revelation as the stick); needs a concave curve
      "unconditional"  -- one signal regardless of the test choice
      "general"        -- conditional, any strictly increasing curve
    """

    def __init__(self, params: ModelParams, curve: AnticipationCurve,
                 mode: str = "conditional", grid_n: int = 2001,
                 root_tol: float = ROOT_TOL):
        if mode not in ("conditional", "unconditional", "general"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode in ("conditional", "unconditional") and not curve.concave:
            raise ValueError(
                f"{mode} mode needs a concave curve; use mode='general'"
            )
        self.params = params
        self.curve = curve
        self.mode = mode
        self.root_tol = float(root_tol)
        self.kink = treat_cap(params)
        self._right_env = None
        self._minorant = None

        if mode == "general":
            raw = lambda m: accept_value(m, params, curve)
            self._right_env = concave_envelope(
                raw, self.kink, 1.0, grid_n, knots=()
            )
            env = self._right_env

            def accept(m):
                m_a = np.asarray(m, dtype=float)
                lifted = np.maximum(raw(m_a), env(np.clip(m_a, self.kink, 1.0)))
                out = np.where(m_a <= self.kink, raw(m_a), lifted)
                return float(out) if np.ndim(m) == 0 else out

            self._accept = accept
            self._minorant = convex_minorant(
                lambda m: skip_value(m, params, curve), 0.0, 1.0, grid_n
            )
            self._flat_left = True
            self._concave_right = True
        elif mode == "unconditional":
            self._accept = lambda m: accept_value(m, params, curve) - skip_value(
                m, params, curve
            )
            self._flat_left = False
            self._concave_right = False
        else:
            self._accept = lambda m: accept_value(m, params, curve)
            self._flat_left = True
            self._concave_right = True

        tan = tangent_from_point(
            self._accept, (0.0, self._accept(0.0)), self.kink, 1.0
        )
        self.comfort = self.kink if tan.degenerate else tan.touch
        self.comfort_degenerate = tan.degenerate
        self._thresholds = None

    # -- outside option -------------------------------------------------

    def outside_value(self, prior: float) -> float:
        if self.mode == "unconditional":
            return 0.0
        if self.mode == "general":
            return min(
                skip_value(prior, self.params, self.curve),
                self._minorant(prior),
            )
        return skip_value_revealed(prior, self.params, self.curve)

    def reject_signal(self, prior: float) -> PosteriorLottery:
        if self.mode == "unconditional":
            return PosteriorLottery.point(prior)
        if self.mode == "general":
            bridge = self._minorant.bridge_at(prior)
            if bridge is None:
                return PosteriorLottery.point(prior)
            return PosteriorLottery.binary(prior, bridge[0], bridge[1])
        return PosteriorLottery.binary(prior, 0.0, 1.0)

    # -- per-belief solve -----------------------------------------------

    def lower_belief(self, prior: float) -> float:
        """Lower atom of the binding perfect-good-news signal (closed form
        on the flat branch)."""
        return _binding_lower(self._accept, self.outside_value(prior), prior,
                              self.kink, self._flat_left, self.root_tol)

    def upper_belief(self, prior: float) -> float:
        """Upper atom of the binding perfect-bad-news signal."""
        h = _binding_upper(self._accept, self.outside_value(prior), prior,
                           self.comfort, self._concave_right, self.root_tol)
        if h is None:
            raise ValueError(f"no feasible bad-news signal at belief {prior}")
        return h

    def solve(self, prior: float) -> InterimSolution:
        region, lottery = _bgn_solve(
            prior,
            self._accept,
            self.outside_value(prior),
            self.kink,
            self.comfort,
            self._flat_left,
            self._concave_right,
            self.root_tol,
        )
        if self.mode == "general":
            lottery = self._lift_split(lottery)
        return self._assemble(prior, region, lottery)

    def _lift_split(self, lottery: PosteriorLottery) -> PosteriorLottery:
        """Split atoms resting on a bridged stretch of the envelope into
        its contact endpoints; payoffs are preserved by construction."""
        env = self._right_env
        raw = lambda m: accept_value(m, self.params, self.curve)
        out = []
        for mu, w in lottery:
            if mu <= self.kink or env(mu) <= raw(mu) + 1e-8:
                out.append((mu, w))
                continue
            bridge = env.bridge_at(mu)
            if bridge is None:
                raise RuntimeError(
                    f"lifted atom {mu} has no bridging segment; envelope "
                    "inconsistent with its own contact set"
                )
            lo, hi = bridge
            rho = (mu - lo) / (hi - lo)
            out.append((lo, w * (1.0 - rho)))
            out.append((hi, w * rho))
        return PosteriorLottery.of(out, prior=lottery.mean)

    def _assemble(self, prior, region, lottery) -> InterimSolution:
        params, curve = self.params, self.curve
        accepts = region is not Region.REFUSE
        if self.mode == "unconditional":
            # one signal regardless of the choice: the refusal side sees
            # the same lottery, which is what prices the outside option
            reject = lottery
        else:
            reject = self.reject_signal(prior)
        reject_value = reject.expect(lambda m: skip_value(m, params, curve))
        if accepts:
            doctor = params.alpha + (1.0 - params.alpha) * lottery.expect(
                lambda m: sick_recovery(m, params)
            )
            patient = lottery.expect(lambda m: accept_value(m, params, curve))
            if self.mode == "unconditional":
                slack = patient - lottery.expect(
                    lambda m: skip_value(m, params, curve)
                )
                patient_final = patient
            else:
                slack = patient - reject_value
                patient_final = patient
        else:
            doctor = params.alpha + (1.0 - params.alpha) * untreated_recovery(
                prior, params
            )
            gain = lottery.expect(lambda m: accept_value(m, params, curve))
            if self.mode == "unconditional":
                slack = gain - lottery.expect(
                    lambda m: skip_value(m, params, curve)
                )
            else:
                slack = gain - reject_value
            patient_final = reject_value
        return InterimSolution(
            prior=prior,
            region=region,
            accept_signal=lottery,
            reject_signal=reject,
            accepts=accepts,
            doctor_value=float(doctor),
            patient_value=float(patient_final),
            pc_slack=float(slack),
        )

    def health(self, prior: float) -> float:
        """Health probability at this interim belief under the optimal
        signal (no pre-test disclosure)."""
        return self.solve(prior).doctor_value

    # -- instance thresholds ---------------------------------------------

    def _favorite_value(self, m):
        if m <= self.kink:
            return self._accept(m)
        w = (1.0 - m) / (1.0 - self.kink)
        return w * self._accept(self.kink) + (1.0 - w) * self._accept(1.0)

    def _reward_value(self, m):
        if m >= self.comfort:
            return self._accept(m)
        return _bad_news_value(self._accept, m, self.comfort, self._accept(0.0))

    def thresholds(self) -> Thresholds:
        if self._thresholds is not None:
            return self._thresholds
        if self.mode != "conditional":
            raise ValueError("interval thresholds are defined for the conditional mode")
        params, curve = self.params, self.curve
        fear = reacts_to_fear(params, curve)
        rhs = lambda m: skip_value_revealed(m, params, curve)
        guide = disclose = lo = hi = None
        if fear:
            guide = self._cap_of(lambda m: self._favorite_value(m) - rhs(m),
                                 piece_kink=self.kink)
            disclose = self._cap_of(
                lambda m: (1.0 - m) * self._accept(0.0)
                + m * self._accept(1.0)
                - rhs(m),
                piece_kink=None,
            )
            hi = self._cap_of(lambda m: self._reward_value(m) - rhs(m),
                              piece_kink=None, concave=True)
            lo = 0.0
        else:
            d = lambda m: self._reward_value(m) - rhs(m)
            peak, peak_val = golden_max(d, 0.0, 1.0)
            if peak_val >= 0.0:
                lo = bisect_root(d, 0.0, peak) if d(0.0) < 0.0 else 0.0
                hi = bisect_root(d, peak, 1.0) if d(1.0) < 0.0 else 1.0
        self._thresholds = Thresholds(
            treat_cap=self.kink,
            comfort_cap=self.comfort,
            guide_cap=guide,
            disclose_cap=disclose,
            persuade_lo=lo,
            persuade_hi=hi,
            reacts_to_fear=fear,
            comfort_degenerate=self.comfort_degenerate,
        )
        return self._thresholds

    @staticmethod
    def _cap_of(diff, piece_kink=None, concave=False):
        """Largest belief where ``diff`` is still nonnegative, given
        diff(0) >= 0; 1.0 when it never goes negative."""
        if diff(1.0) >= -1e-14:
            return 1.0
        if concave:
            return bisect_root(diff, 0.0, 1.0)
        if piece_kink is not None and diff(piece_kink) < 0.0:
            return bisect_root(diff, 0.0, piece_kink)
        lo = piece_kink if piece_kink is not None else 0.0
        return bisect_root(diff, lo, 1.0)


# ---------------------------------------------------------------------
# convenience wrappers
# ---------------------------------------------------------------------


def solve_interim(prior, params, curve) -> InterimSolution:
    return InterimSolver(params, curve, "conditional").solve(prior)


def solve_interim_unconditional(prior, params, curve) -> InterimSolution:
    return InterimSolver(params, curve, "unconditional").solve(prior)


def solve_interim_general(prior, params, curve, grid_n=2001) -> InterimSolution:
    return InterimSolver(params, curve, "general", grid_n).solve(prior)


def interim_health(prior, params, curve) -> float:
    return InterimSolver(params, curve, "conditional").health(prior)


def monotonicity_report(solver: InterimSolver, n: int = 100) -> dict:
    """Checks that both binding atoms fall as the interim belief rises,
    and that they meet the adjacent closed forms at the region borders."""
    th = solver.thresholds()
    report = {"ok": True, "violations": [], "checked": 0}
    eps = 1e-6

    def run(cap_lo, cap_hi, fn, label):
        if cap_lo is None or cap_hi is None or cap_hi - cap_lo < 10 * eps:
            return None
        grid = np.linspace(cap_lo + eps, cap_hi - eps, n)
        vals = np.array([fn(m) for m in grid])
        bad = np.flatnonzero(np.diff(vals) > 1e-9)
        for i in bad:
            report["ok"] = False
            report["violations"].append((label, float(grid[i]), float(grid[i + 1])))
        report["checked"] += len(grid)
        return vals

    run(th.guide_cap, th.disclose_cap, solver.lower_belief, "lower_belief")
    run(th.disclose_cap, th.persuade_hi, solver.upper_belief, "upper_belief")

    if th.disclose_cap is not None and th.disclose_cap < 1.0 - 1e-9:
        report["lower_at_border"] = solver.lower_belief(th.disclose_cap)
    if th.persuade_hi is not None and th.persuade_hi < 1.0 - 1e-9:
        report["upper_at_border"] = solver.upper_belief(th.persuade_hi - 1e-9)
    return report
