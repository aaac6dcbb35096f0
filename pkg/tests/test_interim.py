import numpy as np
import pytest

from infopolicy import (
    AnticipationCurve,
    InterimSolver,
    ModelParams,
    Region,
    accept_value,
    doctor_favorite_signal,
    patient_favorite_signal,
    sick_recovery,
    skip_value,
    skip_value_revealed,
    solve_interim,
    solve_interim_general,
    solve_interim_unconditional,
    treat_cap,
    untreated_recovery,
)
from infopolicy.envelope import concave_envelope
from infopolicy.interim import monotonicity_report
from infopolicy.oracle import random_instance

from conftest import (
    committed_comfort_instance,
    inverse_s_instance,
    strictly_concave_instance,
    with_prior,
)


class TestComfortCap:
    def test_linear_curve_gives_exactly_one(self, baseline, linear):
        assert InterimSolver(baseline, linear).comfort == 1.0

    def test_interior_tangency_residual(self, comfy):
        params, curve = comfy
        solver = InterimSolver(params, curve)
        cap = solver.comfort
        assert treat_cap(params) < cap < 1.0
        # chord slope from the anchor equals the local derivative
        v = lambda m: accept_value(m, params, curve)
        slope = (v(cap) - v(0.0)) / cap
        h = 1e-7
        deriv = (v(cap + h) - v(cap - h)) / (2 * h)
        assert abs(v(cap) - v(0.0) - cap * deriv) <= 1e-6
        assert slope == pytest.approx(deriv, abs=1e-5)

    def test_flat_untreated_branch_degenerates(self):
        # the two untreated scenarios nearly coincide, so rewarding with
        # optimism has nothing to offer
        gap = 1e-10
        params = ModelParams(
            alpha=0.3, p_treated=0.9, p_good=0.4 + gap, p_bad=0.4,
            cost=0.5 - 0.5 * gap, prior=0.5,
        )
        solver = InterimSolver(params, AnticipationCurve.power(0.6))
        assert solver.comfort_degenerate
        assert solver.comfort == pytest.approx(treat_cap(params))


class TestFavoriteSignals:
    def test_doctor_signal_below_cap_is_silence(self, baseline):
        assert doctor_favorite_signal(0.3, baseline).support == (0.3,)

    def test_doctor_signal_weights(self, baseline):
        lot = doctor_favorite_signal(0.8, baseline)
        assert lot.support == (treat_cap(baseline), 1.0)
        assert lot.weights[0] == pytest.approx(2.0 / 3.0)

    def test_doctor_signal_attains_doctor_envelope(self, baseline, bendy):
        env = concave_envelope(
            lambda m: sick_recovery(m, baseline), 0.0, 1.0, 4001,
            knots=(treat_cap(baseline),),
        )
        for mu in (0.75, 0.85, 0.95):
            lot = doctor_favorite_signal(mu, baseline)
            assert lot.expect(lambda m: sick_recovery(m, baseline)) == pytest.approx(
                env(mu), abs=1e-6
            )

    def test_patient_signal_attains_value_envelope(self, baseline, bendy):
        solver = InterimSolver(baseline, bendy)
        env = concave_envelope(
            lambda m: accept_value(m, baseline, bendy), 0.0, 1.0, 4001,
            knots=(treat_cap(baseline), solver.comfort),
        )
        for mu in (0.2, 0.5, solver.comfort / 2):
            lot = patient_favorite_signal(mu, baseline, bendy, solver.comfort)
            got = lot.expect(lambda m: accept_value(m, baseline, bendy))
            assert got == pytest.approx(env(mu), abs=1e-6)

    def test_patient_signal_silent_beyond_comfort(self, baseline, bendy):
        solver = InterimSolver(baseline, bendy)
        mu = 0.5 * (solver.comfort + 1.0)
        assert patient_favorite_signal(
            mu, baseline, bendy, solver.comfort
        ).support == (mu,)


class TestThresholdOrdering:
    def test_fear_case_ordering(self):
        rng = np.random.default_rng(31)
        seen = 0
        while seen < 25:
            params, curve = strictly_concave_instance(rng)
            solver = InterimSolver(params, curve)
            th = solver.thresholds()
            if not th.reacts_to_fear:
                continue
            seen += 1
            assert th.persuade_lo == 0.0
            assert th.guide_cap <= th.disclose_cap + 1e-9
            assert th.disclose_cap <= th.persuade_hi + 1e-9

    def test_fear_strict_concavity_keeps_caps_interior(self, baseline):
        solver = InterimSolver(baseline, AnticipationCurve.exponential(6.0))
        th = solver.thresholds()
        assert th.reacts_to_fear
        assert th.persuade_hi < 1.0

    def test_nonfear_band_or_empty(self):
        rng = np.random.default_rng(37)
        empties = bands = 0
        for _ in range(300):
            params, curve = strictly_concave_instance(rng)
            solver = InterimSolver(params, curve)
            th = solver.thresholds()
            if th.reacts_to_fear:
                continue
            assert th.guide_cap is None and th.disclose_cap is None
            if th.persuade_hi is None:
                empties += 1
                # emptiness agrees with the sup test on a grid
                worst = max(
                    solver._reward_value(m) - skip_value_revealed(m, params, curve)
                    for m in np.linspace(0, 1, 200)
                )
                assert worst < 1e-7
            else:
                bands += 1
                assert 0.0 < th.persuade_lo <= th.persuade_hi < 1.0
            if empties >= 5 and bands >= 3:
                break
        assert empties > 0 and bands > 0

    def test_linear_caps_hit_one(self, baseline, linear):
        th = InterimSolver(baseline, linear).thresholds()
        assert th.disclose_cap == 1.0
        assert th.persuade_hi == 1.0
        # with the identity curve the doctor-favorite signal meets the
        # revealed outside value everywhere, so nothing ever binds strictly
        cap = treat_cap(baseline)
        for mu in np.linspace(0.0, 1.0, 101)[:-1]:
            sig = doctor_favorite_signal(float(mu), baseline)
            ev = sig.expect(lambda m: accept_value(m, baseline, linear))
            assert ev >= skip_value_revealed(mu, baseline, linear) - 1e-12


class TestOptimalInterim:
    def test_guide_region_silence_below_cap(self, baseline, bendy):
        th = InterimSolver(baseline, bendy).thresholds()
        mu = 0.5 * min(th.guide_cap, th.treat_cap)
        sol = solve_interim(mu, baseline, bendy)
        assert sol.region is Region.GUIDE
        assert sol.accept_signal.support == (mu,)
        assert sol.pc_slack >= -1e-12

    def test_warn_region_structure(self, baseline, bendy):
        solver = InterimSolver(baseline, bendy)
        th = solver.thresholds()
        mu = 0.5 * (th.guide_cap + th.disclose_cap)
        sol = solver.solve(mu)
        assert sol.region is Region.WARN
        lo, hi = sol.accept_signal.support
        assert hi == 1.0
        assert lo <= th.treat_cap + 1e-12
        assert abs(sol.pc_slack) <= 1e-8

    def test_comfort_region_structure(self, comfy):
        params, curve = comfy
        solver = InterimSolver(params, curve)
        th = solver.thresholds()
        assert th.disclose_cap < th.persuade_hi
        mu = 0.5 * (th.disclose_cap + th.persuade_hi)
        sol = solver.solve(mu)
        assert sol.region is Region.COMFORT
        lo, hi = sol.accept_signal.support
        assert lo == 0.0
        assert solver.comfort - 1e-9 < hi < 1.0
        assert abs(sol.pc_slack) <= 1e-8

    def test_refuse_region(self, baseline, bendy):
        th = InterimSolver(baseline, bendy).thresholds()
        mu = 0.5 * (th.persuade_hi + 1.0)
        sol = solve_interim(mu, baseline, bendy)
        assert sol.region is Region.REFUSE
        assert not sol.accepts
        assert sol.doctor_value == pytest.approx(
            baseline.alpha
            + (1 - baseline.alpha) * untreated_recovery(mu, baseline)
        )

    def test_reject_signal_is_full_disclosure(self, baseline, bendy):
        sol = solve_interim(0.5, baseline, bendy)
        assert sol.reject_signal.support == (0.0, 1.0)

    def test_warn_binding_equation_residual(self):
        rng = np.random.default_rng(41)
        checked = 0
        while checked < 30:
            params, curve = strictly_concave_instance(rng)
            solver = InterimSolver(params, curve)
            th = solver.thresholds()
            if not th.reacts_to_fear or th.disclose_cap - th.guide_cap < 1e-3:
                continue
            mu = rng.uniform(th.guide_cap + 1e-6, th.disclose_cap - 1e-6)
            sol = solver.solve(mu)
            if sol.region is not Region.WARN:
                continue
            ev = sol.accept_signal.expect(lambda m: accept_value(m, params, curve))
            assert abs(ev - skip_value_revealed(mu, params, curve)) <= 1e-10
            checked += 1

    def test_comfort_binding_equation_residual(self):
        rng = np.random.default_rng(43)
        checked = 0
        while checked < 20:
            params, curve = strictly_concave_instance(rng)
            solver = InterimSolver(params, curve)
            th = solver.thresholds()
            hi = th.persuade_hi
            lo = th.disclose_cap if th.disclose_cap is not None else th.persuade_lo
            if hi is None or hi - lo < 1e-3:
                continue
            mu = rng.uniform(lo + 1e-6, hi - 1e-6)
            sol = solver.solve(mu)
            if sol.region is not Region.COMFORT:
                continue
            h = sol.accept_signal.support[-1]
            lhs = (1 - mu / h) * accept_value(0.0, params, curve) + (
                mu / h
            ) * accept_value(h, params, curve)
            assert abs(lhs - skip_value_revealed(mu, params, curve)) <= 1e-10
            checked += 1

    def test_linear_identity_lower_equals_cap(self, linear):
        rng = np.random.default_rng(47)
        for _ in range(20):
            params, _ = random_instance(rng)
            solver = InterimSolver(params, linear)
            cap = treat_cap(params)
            for mu in np.linspace(0.0, 1.0, 52)[1:-1]:
                assert abs(solver.lower_belief(mu) - cap) <= 1e-10

    def test_exact_threshold_belief_assigned_to_lower_region(self, baseline):
        curve = AnticipationCurve.exponential(6.0)
        solver = InterimSolver(baseline, curve)
        th = solver.thresholds()
        assert solver.solve(th.guide_cap).region is Region.GUIDE


class TestMonotonicityAndBorders:
    def test_monotone_report_clean(self):
        rng = np.random.default_rng(53)
        done = 0
        while done < 15:
            params, curve = strictly_concave_instance(rng)
            solver = InterimSolver(params, curve)
            if not solver.thresholds().reacts_to_fear:
                continue
            rep = monotonicity_report(solver)
            assert rep["ok"], rep["violations"]
            done += 1

    def test_border_limits(self, comfy):
        # at the full-disclosure border the warning atom hits 0; at the
        # persuadable border the comfort atom meets the patient-optimal
        # signal: the tangency when it binds, silence otherwise
        params, curve = comfy
        solver = InterimSolver(params, curve)
        th = solver.thresholds()
        assert abs(solver.lower_belief(th.disclose_cap)) <= 1e-4
        assert solver.upper_belief(th.persuade_hi - 1e-9) == pytest.approx(
            max(solver.comfort, th.persuade_hi), abs=1e-4
        )

    def test_border_meets_tangency_when_band_ends_early(self):
        # configuration with the persuadable border below the tangency:
        # there the binding comfort atom converges to the tangency itself
        rng = np.random.default_rng(77)
        for _ in range(3000):
            params, curve = strictly_concave_instance(rng)
            solver = InterimSolver(params, curve)
            th = solver.thresholds()
            if th.persuade_hi is None or th.persuade_hi >= 1.0 - 1e-9:
                continue
            dc = th.disclose_cap if th.disclose_cap is not None else th.persuade_lo
            if th.persuade_hi - dc < 1e-3:
                continue
            if th.persuade_hi < solver.comfort - 1e-3:
                h = solver.upper_belief(th.persuade_hi - 1e-9)
                assert h == pytest.approx(solver.comfort, abs=1e-4)
                return
        pytest.fail("no instance with the border below the tangency")

    def test_linear_lower_constant(self, baseline, linear):
        solver = InterimSolver(baseline, linear)
        vals = [solver.lower_belief(m) for m in np.linspace(0.1, 0.95, 20)]
        assert np.allclose(vals, treat_cap(baseline), atol=1e-10)


class TestUnconditional:
    def test_dominated_by_conditional(self):
        rng = np.random.default_rng(59)
        for _ in range(10):
            params, curve = strictly_concave_instance(rng)
            for mu in np.linspace(0.05, 0.95, 7):
                u = solve_interim_unconditional(mu, params, curve)
                c = solve_interim(mu, params, curve)
                assert u.doctor_value <= c.doctor_value + 1e-9

    def test_degenerate_prior_matches_conditional(self, baseline, bendy):
        u = solve_interim_unconditional(0.0, baseline, bendy)
        c = solve_interim(0.0, baseline, bendy)
        assert u.accepts == c.accepts
        assert u.accept_signal.support == c.accept_signal.support
        assert u.doctor_value == pytest.approx(c.doctor_value, abs=1e-12)

    def test_regions_shrink(self):
        rng = np.random.default_rng(61)
        for _ in range(8):
            params, curve = strictly_concave_instance(rng)
            cond = InterimSolver(params, curve)
            unc = InterimSolver(params, curve, "unconditional")
            for mu in np.linspace(0.05, 0.95, 9):
                if unc.solve(mu).accepts:
                    assert cond.solve(mu).accepts

    def test_reject_signal_keeps_lottery(self, baseline, bendy):
        # one signal regardless of the choice: the reject side sees it too
        u = solve_interim_unconditional(0.75, baseline, bendy)
        assert u.reject_signal.support == u.accept_signal.support or len(
            u.reject_signal
        ) == 1

    def test_never_beaten_by_full_binary_search(self):
        # the substituted branch structure must survive an unrestricted
        # enumeration of binary signals (non-straddling supports included)
        from infopolicy.model import sick_recovery
        from infopolicy.oracle import grid_signal_oracle

        rng = np.random.default_rng(555)
        for _ in range(10):
            params, curve = strictly_concave_instance(rng)
            solver = InterimSolver(params, curve, "unconditional")
            doctor = lambda m: params.alpha + (1 - params.alpha) * sick_recovery(
                m, params
            )
            gain = lambda m: accept_value(m, params, curve) - skip_value(
                m, params, curve
            )
            for mu in rng.uniform(0.03, 0.97, 4):
                sol = solver.solve(float(mu))
                res = grid_signal_oracle(float(mu), doctor, gain, 0.0,
                                         grid_n=801, max_atoms=2)
                refusal = params.alpha + (1 - params.alpha) * untreated_recovery(
                    mu, params
                )
                best = max(res.best_value, refusal) if res.feasible else refusal
                assert sol.doctor_value >= best - 1e-10

    def test_linear_feasibility_matches_treatment_wedge(self, baseline, linear):
        # identity curve: testing helps exactly when a zero-cost warning
        # exists, so the patient accepts everywhere below the cap
        for mu in np.linspace(0.01, 0.99, 21):
            sol = solve_interim_unconditional(mu, baseline, linear)
            assert sol.accepts
            assert sol.pc_slack >= -1e-12


class TestGeneralCurves:
    def test_concave_curve_reduces_exactly(self, baseline):
        for curve in (AnticipationCurve.power(0.5),
                      AnticipationCurve.exponential(6.0)):
            for mu in (0.2, 0.76, 0.9, 0.97):
                a = solve_interim(mu, baseline, curve)
                b = solve_interim_general(mu, baseline, curve)
                assert a.region == b.region
                assert np.allclose(
                    a.accept_signal.support, b.accept_signal.support, atol=1e-9
                )
                assert a.doctor_value == pytest.approx(b.doctor_value, abs=1e-10)

    def test_conditional_mode_rejects_mixed_curve(self, baseline):
        with pytest.raises(ValueError, match="general"):
            InterimSolver(baseline, AnticipationCurve.inverse_s(0.5))

    @staticmethod
    def _split_cases(n_needed=3, seed=123, max_instances=800):
        rng = np.random.default_rng(seed)
        cases = []
        for _ in range(max_instances):
            params, curve = inverse_s_instance(rng)
            solver = InterimSolver(params, curve, "general")
            for mu in np.linspace(0.15, 0.97, 10):
                sol = solver.solve(float(mu))
                assert len(sol.accept_signal) <= 3
                assert sol.accept_signal.mean == pytest.approx(mu, abs=1e-10)
                if len(sol.accept_signal) == 3:
                    cases.append((params, curve, solver, float(mu), sol))
            if len(cases) >= n_needed:
                break
        return cases

    def test_split_preserves_mean_and_count(self):
        cases = self._split_cases()
        assert cases, "no three-atom optimum found"
        for params, curve, solver, mu, sol in cases:
            assert sol.accept_signal.mean == pytest.approx(mu, abs=1e-12)
            assert len(sol.accept_signal) == 3

    def test_split_value_matches_envelope_solution(self):
        cases = self._split_cases()
        assert cases
        for params, curve, solver, mu, sol in cases:
            env_val = sol.accept_signal.expect(solver._accept)
            raw_val = sol.accept_signal.expect(
                lambda m: accept_value(m, params, curve)
            )
            assert raw_val == pytest.approx(env_val, abs=1e-7)
            assert sol.pc_slack >= -1e-8

    def test_never_beaten_by_trinary_search(self):
        from infopolicy.model import sick_recovery
        from infopolicy.oracle import grid_signal_oracle

        rng = np.random.default_rng(777)
        for _ in range(8):
            params, curve = inverse_s_instance(rng)
            solver = InterimSolver(params, curve, "general")
            doctor = lambda m: params.alpha + (1 - params.alpha) * sick_recovery(
                m, params
            )
            accept = lambda m: accept_value(m, params, curve)
            for mu in rng.uniform(0.05, 0.95, 3):
                sol = solver.solve(float(mu))
                rhs = solver.outside_value(float(mu))
                res = grid_signal_oracle(float(mu), doctor, accept, rhs,
                                         grid_n=201, max_atoms=3)
                refusal = params.alpha + (1 - params.alpha) * untreated_recovery(
                    mu, params
                )
                best = max(res.best_value, refusal) if res.feasible else refusal
                assert sol.doctor_value >= best - 1e-10


class TestHealthCurve:
    def test_flat_then_endpoint_values(self, baseline, bendy):
        solver = InterimSolver(baseline, bendy)
        th = solver.thresholds()
        mu_low = 0.5 * min(th.guide_cap, th.treat_cap)
        expect_low = baseline.alpha + (1 - baseline.alpha) * baseline.p_treated
        assert solver.health(mu_low) == pytest.approx(expect_low, abs=1e-12)
        expect_hi = baseline.alpha + (1 - baseline.alpha) * baseline.p_good
        assert solver.health(1.0) == pytest.approx(expect_hi, abs=1e-12)

    def test_comfort_stretch_concave(self, comfy):
        params, curve = comfy
        solver = InterimSolver(params, curve)
        th = solver.thresholds()
        grid = np.linspace(th.disclose_cap + 1e-6, th.persuade_hi - 1e-6, 41)
        vals = np.array([solver.health(m) for m in grid])
        mid = 0.5 * (vals[:-2] + vals[2:])
        assert np.all(mid <= vals[1:-1] + 1e-9)
