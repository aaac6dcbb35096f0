"""Optimal disclosure before the test decision.

With mandatory listening the opening signal is solved by backward induction
over the interim value curve.  When the patient can also walk away from the
consultation, the problem collapses to a single pre-test signal with silent
interim play, solved through the same branch kernel as the interim stage
with the consultation payoff in place of the test payoff.
"""

from __future__ import annotations

from dataclasses import dataclass


from .envelope import bisect_root, golden_max, tangent_from_point
from .interim import InterimSolver, InterimSolution, _bgn_solve
from .model import (
    AnticipationCurve,
    ModelParams,
    PolicyReport,
    PosteriorLottery,
    Regime,
    Region,
    consult_value,
    reacts_to_fear,
    skip_value,
    accept_value,
    treat_cap,
    untreated_recovery,
)

__all__ = [
    "ExAnteSolution",
    "solve_exante",
    "visit_thresholds",
    "solve_with_optout",
    "classify_regime",
    "pool_to_recommendation",
    "full_thresholds",
    "to_report",
]


@dataclass(frozen=True)
class ExAnteSolution:
    """Opening lottery plus the committed interim play at each atom."""

    lottery: PosteriorLottery
    interim: tuple  # ((atom, InterimSolution), ...)
    regime: Regime
    doctor_value: float
    patient_value: float
    optout_slack: float | None = None


def _interim_map(solver: InterimSolver, lottery: PosteriorLottery):
    return tuple((mu, solver.solve(mu)) for mu, _ in lottery)


def _values_from_map(lottery, interim):
    doctor = sum(w * sol.doctor_value for (_, w), (_, sol) in zip(lottery, interim))
    patient = sum(w * sol.patient_value for (_, w), (_, sol) in zip(lottery, interim))
    return float(doctor), float(patient)


# ---------------------------------------------------------------------
# mandatory listening
# ---------------------------------------------------------------------


def solve_exante(params: ModelParams, curve: AnticipationCurve,
                 root_tol: float = 1e-12) -> ExAnteSolution:
    """Optimal opening signal when the patient must listen."""
    solver = InterimSolver(params, curve, "conditional", root_tol=root_tol)
    th = solver.thresholds()
    mu0 = params.prior

    if th.reacts_to_fear:
        warn_atom = min(th.guide_cap, th.treat_cap)
        if mu0 <= warn_atom:
            lottery = PosteriorLottery.point(mu0)
            regime = Regime.NO_DISCLOSURE_NEEDED
        else:
            lottery = PosteriorLottery.binary(mu0, warn_atom, 1.0)
            regime = Regime.PREEMPTIVE_WARNING
    elif th.persuade_hi is None:
        lottery = PosteriorLottery.point(mu0)
        regime = Regime.UNABLE_TO_PERSUADE
    else:
        lo_hat, hi_hat = _comfort_contacts(solver, th)
        if mu0 < lo_hat:
            lottery = PosteriorLottery.binary(mu0, 0.0, lo_hat)
        elif mu0 > hi_hat:
            lottery = PosteriorLottery.binary(mu0, hi_hat, 1.0)
        else:
            lottery = PosteriorLottery.point(mu0)
        regime = Regime.COMMITTED_COMFORT

    interim = _interim_map(solver, lottery)
    doctor, patient = _values_from_map(lottery, interim)
    return ExAnteSolution(lottery, interim, regime, doctor, patient)


def _comfort_contacts(solver: InterimSolver, th):
    """Contact beliefs of the persuadable stretch of the interim value
    curve: chords from the two certainty points are tangent there."""
    lo, hi = th.persuade_lo, th.persuade_hi
    p0 = solver.health(0.0)
    p1 = solver.health(1.0)

    def slope_from_zero(b):
        return (solver.health(b) - p0) / b

    def neg_slope_to_one(a):
        # support chord anchored right of the stretch: minimize the slope
        return -(solver.health(a) - p1) / (a - 1.0)

    lo = max(lo, 1e-9)
    lo_hat, _ = golden_max(slope_from_zero, lo, hi)
    for corner in (lo, hi):
        if slope_from_zero(corner) >= slope_from_zero(lo_hat):
            lo_hat = corner
    hi_hat, _ = golden_max(neg_slope_to_one, lo, hi)
    for corner in (lo, hi):
        if neg_slope_to_one(corner) >= neg_slope_to_one(hi_hat):
            hi_hat = corner
    return float(lo_hat), float(hi_hat)


def pool_to_recommendation(solution: ExAnteSolution, params, curve):
    """Pool the opening atoms into one tested and one untested atom, mixing
    the committed interim lotteries.

    The joint distribution over final posteriors is unchanged, so the
    doctor's value is preserved exactly and the patient's cannot fall.
    Returns (solution, pooled); policies that are already simple
    recommendations, or have no tested atom, come back unchanged."""
    from .model import sick_recovery

    tested = [(mu, w, sol) for (mu, w), (_, sol) in zip(solution.lottery, solution.interim)
              if sol.accepts]
    untested = [(mu, w, sol) for (mu, w), (_, sol) in zip(solution.lottery, solution.interim)
                if not sol.accepts]
    if not tested or not untested or (len(tested) == 1 and len(untested) == 1):
        return solution, False

    def pool(group):
        w_tot = sum(w for _, w, _ in group)
        mu_bar = sum(mu * w for mu, w, _ in group) / w_tot
        accept_atoms, reject_atoms = [], []
        for _, w, sol in group:
            accept_atoms.extend((nu, p * w / w_tot) for nu, p in sol.accept_signal)
            reject_atoms.extend((nu, p * w / w_tot) for nu, p in sol.reject_signal)
        return (mu_bar, w_tot,
                PosteriorLottery.of(accept_atoms, prior=mu_bar),
                PosteriorLottery.of(reject_atoms, prior=mu_bar))

    def node(mu, accept_sig, reject_sig, accepts):
        gain = accept_sig.expect(lambda m: accept_value(m, params, curve))
        stay = reject_sig.expect(lambda m: skip_value(m, params, curve))
        if accepts:
            doctor = params.alpha + (1.0 - params.alpha) * accept_sig.expect(
                lambda m: sick_recovery(m, params)
            )
        else:
            doctor = params.alpha + (1.0 - params.alpha) * untreated_recovery(mu, params)
        return InterimSolution(
            prior=mu,
            region=Region.GUIDE if accepts else Region.REFUSE,
            accept_signal=accept_sig,
            reject_signal=reject_sig,
            accepts=accepts,
            doctor_value=float(doctor),
            patient_value=float(gain if accepts else stay),
            pc_slack=float(gain - stay),
        )

    mu_lo, w_lo, acc_lo, rej_lo = pool(tested)
    mu_hi, w_hi, acc_hi, rej_hi = pool(untested)
    lottery = PosteriorLottery.of(
        [(mu_lo, w_lo), (mu_hi, w_hi)], prior=solution.lottery.mean
    )
    interim = (
        (mu_lo, node(mu_lo, acc_lo, rej_lo, True)),
        (mu_hi, node(mu_hi, acc_hi, rej_hi, False)),
    )
    doctor, patient = _values_from_map(lottery, interim)
    pooled = ExAnteSolution(lottery, interim, solution.regime, doctor, patient,
                            solution.optout_slack)
    return pooled, True


# ---------------------------------------------------------------------
# opt-out (pre-test participation)
# ---------------------------------------------------------------------


def visit_thresholds(params: ModelParams, curve: AnticipationCurve):
    """Caps of the prior for the opt-out problem: below the first the
    patient visits with no disclosure at all; below the second an opening
    full-disclosure keeps him; below the third some opening signal does."""
    if not reacts_to_fear(params, curve):
        return None, None, None
    blind = accept_value(0.0, params, curve)

    def stay_away(m):
        return skip_value(m, params, curve)

    if stay_away(1.0) <= blind:
        return 1.0, 1.0, 1.0
    noinfo_cap = bisect_root(lambda m: stay_away(m) - blind, 0.0, 1.0)

    cv = lambda m: consult_value(m, params, curve)
    top, bottom = cv(1.0), cv(0.0)

    def fd_gap(m):
        return m * top + (1.0 - m) * bottom - cv(m)

    if fd_gap(1.0) < -1e-14:  # pragma: no cover - fd_gap(1) == 0 identically
        raise RuntimeError("full-disclosure gap must vanish at certainty")
    x_min, v_min = golden_max(lambda m: -fd_gap(m), noinfo_cap, 1.0)
    if -v_min < -1e-14 and fd_gap(noinfo_cap) > 0.0:
        disclose_cap = bisect_root(fd_gap, noinfo_cap, x_min)
    else:
        disclose_cap = 1.0

    tan = tangent_from_point(cv, (0.0, bottom), noinfo_cap, 1.0)
    visit_cap = noinfo_cap if tan.degenerate else tan.touch
    return noinfo_cap, disclose_cap, visit_cap


def solve_with_optout(params: ModelParams, curve: AnticipationCurve,
                      root_tol: float = 1e-12) -> ExAnteSolution:
    """Optimal policy when the patient can refuse to hear anything.

    Interim play is silent; the opening signal balances the doctor's wish
    for pessimism against keeping the visit worthwhile, through the same
    branch kernel as the interim problem."""
    mu0 = params.prior
    outside = skip_value(mu0, params, curve)
    solver = InterimSolver(params, curve, "conditional", root_tol=root_tol)

    if not reacts_to_fear(params, curve):
        return _optout_nodisclosure(params, curve, solver, Regime.UNABLE_TO_PERSUADE)

    noinfo_cap, disclose_cap, visit_cap = visit_thresholds(params, curve)
    if mu0 <= noinfo_cap:
        return _optout_nodisclosure(params, curve, solver, Regime.NO_DISCLOSURE_NEEDED)
    if mu0 >= visit_cap:
        return _optout_nodisclosure(params, curve, solver, Regime.UNABLE_TO_PERSUADE)

    cv = lambda m: consult_value(m, params, curve)
    region, lottery = _bgn_solve(
        mu0, cv, outside, noinfo_cap, visit_cap, flat_left=True,
        concave_right=True, tol=root_tol,
    )
    regime = {
        Region.GUIDE: Regime.NO_DISCLOSURE_NEEDED,
        Region.WARN: Regime.PREEMPTIVE_WARNING,
        Region.COMFORT: Regime.PREEMPTIVE_COMFORT,
        Region.REFUSE: Regime.UNABLE_TO_PERSUADE,
    }[region]
    interim = tuple((mu, _silent_interim(mu, params, curve, solver)) for mu, _ in lottery)
    doctor, patient = _values_from_map(lottery, interim)
    return ExAnteSolution(lottery, interim, regime, doctor, patient,
                          optout_slack=patient - outside)


def _silent_interim(mu, params, curve, solver) -> InterimSolution:
    """Interim node with no disclosure: the patient tests only when
    testing-and-treating beats walking out."""
    blind = accept_value(0.0, params, curve)
    away = skip_value(mu, params, curve)
    accepts = blind >= away and mu <= treat_cap(params)
    point = PosteriorLottery.point(mu)
    if accepts:
        doctor = params.alpha + (1.0 - params.alpha) * params.p_treated
        patient = blind
    else:
        doctor = params.alpha + (1.0 - params.alpha) * untreated_recovery(mu, params)
        patient = away
    return InterimSolution(
        prior=mu,
        region=Region.GUIDE if accepts else Region.REFUSE,
        accept_signal=point,
        reject_signal=point,
        accepts=accepts,
        doctor_value=float(doctor),
        patient_value=float(patient),
        pc_slack=float(blind - away),
    )


def _optout_nodisclosure(params, curve, solver, regime) -> ExAnteSolution:
    mu0 = params.prior
    lottery = PosteriorLottery.point(mu0)
    sol = _silent_interim(mu0, params, curve, solver)
    patient = sol.patient_value
    return ExAnteSolution(
        lottery,
        ((mu0, sol),),
        regime,
        sol.doctor_value,
        patient,
        optout_slack=patient - skip_value(mu0, params, curve),
    )


# ---------------------------------------------------------------------
# classification and reporting
# ---------------------------------------------------------------------


def classify_regime(params, curve, with_optout=False) -> Regime:
    if with_optout:
        return solve_with_optout(params, curve).regime
    return solve_exante(params, curve).regime


def full_thresholds(params, curve) -> "Thresholds":
    from .model import Thresholds

    solver = InterimSolver(params, curve, "conditional")
    th = solver.thresholds()
    noinfo_cap, disclose_cap, visit_cap = visit_thresholds(params, curve)
    return Thresholds(
        treat_cap=th.treat_cap,
        comfort_cap=th.comfort_cap,
        guide_cap=th.guide_cap,
        disclose_cap=th.disclose_cap,
        persuade_lo=th.persuade_lo,
        persuade_hi=th.persuade_hi,
        visit_noinfo_cap=noinfo_cap,
        visit_disclose_cap=disclose_cap,
        visit_cap=visit_cap,
        reacts_to_fear=th.reacts_to_fear,
        comfort_degenerate=th.comfort_degenerate,
    )


def to_report(solution: ExAnteSolution) -> PolicyReport:
    # entries named *_pc are constraints the policy satisfies (slack is
    # nonnegative up to rounding); refusal margins are diagnostics
    residuals = []
    for mu, sol in solution.interim:
        name = "interim_pc" if sol.accepts else "refusal_margin"
        residuals.append((f"{name}@{mu:.6g}", sol.pc_slack))
    if solution.optout_slack is not None:
        residuals.append(("optout_pc", solution.optout_slack))
    return PolicyReport(
        ex_ante=solution.lottery,
        interim_accept=tuple((mu, sol.accept_signal) for mu, sol in solution.interim),
        interim_reject=tuple((mu, sol.reject_signal) for mu, sol in solution.interim),
        regime=solution.regime,
        doctor_value=solution.doctor_value,
        patient_value=solution.patient_value,
        constraint_residuals=tuple(residuals),
    )
