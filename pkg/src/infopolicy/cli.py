"""Command-line surface: solve, sweep, verify, thresholds.

Configuration is a single JSON document; unknown keys are rejected with the
offending path so typos cannot silently change a run.  All outputs are
deterministic given (config, seed): reports as sorted-key JSON, sweeps as
CSV with a fixed column order.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import click
import numpy as np

from . import exante, extensions, interim, model, oracle
from .envelope import concave_envelope
from .model import AnticipationCurve, ModelParams

log = logging.getLogger("infopolicy")

VARIANTS = (
    "main",
    "main-with-pc",
    "unconditional",
    "physical-cost",
    "test-design",
    "cost-example",
)

_TOP_KEYS = {"variant", "params", "phi", "solver", "sweep", "seed", "out"}
_SOLVER_KEYS = {"grid_n", "root_tol", "oracle_grid", "mc_draws"}
_SWEEP_KEYS = {"variable", "start", "stop", "steps"}
_PHI_KEYS = {
    "family", "gamma", "rate", "kink", "kink_value", "bend_in", "bend_out", "knots",
}
_PARAM_KEYS = {
    "main": {"alpha", "p_treated", "p_good", "p_bad", "cost", "prior"},
    "main-with-pc": {"alpha", "p_treated", "p_good", "p_bad", "cost", "prior"},
    "unconditional": {"alpha", "p_treated", "p_good", "p_bad", "cost", "prior"},
    "physical-cost": {"alpha", "p_treated", "p_good", "p_bad", "cost", "prior", "fee"},
    "test-design": {"alpha0", "p_treated", "p_untreated", "cost"},
    "cost-example": {
        "cost_high", "cost_low", "prior_high", "fee", "payoff_action", "payoff_inaction",
    },
}


class ConfigError(Exception):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"config error at {path}: {message}")


@dataclass
class RunConfig:
    variant: str
    params: dict
    phi: dict | None
    solver: dict = field(default_factory=dict)
    sweep: dict | None = None
    seed: int = 42
    out: str | None = None

    @property
    def grid_n(self):
        return int(self.solver.get("grid_n", 2001))

    @property
    def root_tol(self):
        return float(self.solver.get("root_tol", 1e-10))

    @property
    def oracle_grid(self):
        return int(self.solver.get("oracle_grid", 801))

    @property
    def mc_draws(self):
        return int(self.solver.get("mc_draws", 100_000))


def _check_keys(section, allowed, path):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}", "unknown key")


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("<document>", "top level must be an object")
    _check_keys(raw, _TOP_KEYS, "<top>")
    variant = raw.get("variant", "main")
    if variant not in VARIANTS:
        raise ConfigError("variant", f"must be one of {', '.join(VARIANTS)}")
    params = raw.get("params")
    if not isinstance(params, dict):
        raise ConfigError("params", "missing or not an object")
    _check_keys(params, _PARAM_KEYS[variant], "params")
    missing = _PARAM_KEYS[variant] - set(params) - {"payoff_action", "payoff_inaction"}
    if variant == "physical-cost":
        missing -= {"fee"}
    if missing:
        raise ConfigError("params", f"missing keys: {sorted(missing)}")
    phi = raw.get("phi")
    if phi is not None:
        if not isinstance(phi, dict):
            raise ConfigError("phi", "must be an object")
        _check_keys(phi, _PHI_KEYS, "phi")
    solver = raw.get("solver", {})
    _check_keys(solver, _SOLVER_KEYS, "solver")
    sweep = raw.get("sweep")
    if sweep is not None:
        _check_keys(sweep, _SWEEP_KEYS, "sweep")
    return RunConfig(
        variant=variant,
        params=params,
        phi=phi,
        solver=dict(solver),
        sweep=dict(sweep) if sweep is not None else None,
        seed=int(raw.get("seed", 42)),
        out=raw.get("out"),
    )


def build_curve(phi: dict | None) -> AnticipationCurve:
    if phi is None:
        return AnticipationCurve.linear()
    family = phi.get("family", "linear")
    try:
        if family == "linear":
            return AnticipationCurve.linear()
        if family == "power":
            return AnticipationCurve.power(phi["gamma"])
        if family == "exponential":
            return AnticipationCurve.exponential(phi["rate"])
        if family in ("inverse-s", "inverse_s"):
            return AnticipationCurve.inverse_s(
                phi["kink"],
                kink_value=phi.get("kink_value"),
                bend_in=phi.get("bend_in", 0.5),
                bend_out=phi.get("bend_out", 2.0),
            )
        if family == "tabulated":
            return AnticipationCurve.tabulated(phi["knots"])
    except KeyError as exc:
        raise ConfigError(f"phi.{exc.args[0]}", "missing") from exc
    except ValueError as exc:
        raise ConfigError("phi", str(exc)) from exc
    raise ConfigError("phi.family", f"unknown family {family!r}")


def build_model(cfg: RunConfig) -> ModelParams:
    try:
        return ModelParams(
            alpha=cfg.params["alpha"],
            p_treated=cfg.params["p_treated"],
            p_good=cfg.params["p_good"],
            p_bad=cfg.params["p_bad"],
            cost=cfg.params["cost"],
            prior=cfg.params["prior"],
        )
    except ValueError as exc:
        raise ConfigError("params", str(exc)) from exc


# ---------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------


def run_thresholds(cfg: RunConfig) -> dict:
    if cfg.variant in ("main", "main-with-pc", "unconditional"):
        params = build_model(cfg)
        curve = build_curve(cfg.phi)
        th = exante.full_thresholds(params, curve)
        return th.to_dict()
    if cfg.variant == "physical-cost":
        params = build_model(cfg)
        fp = extensions.FeeModelParams(base=params, fee=cfg.params.get("fee", 0.0))
        guide, persuade = extensions.fee_caps(fp)
        return {"guide_cap": guide, "persuade_cap": persuade}
    if cfg.variant == "test-design":
        tp = _screen_params(cfg)
        cap, goodnews, reward, degenerate = extensions.screen_design_thresholds(tp)
        return {
            "treat_cap": cap,
            "goodnews_cap": goodnews,
            "reward_cap": reward,
            "degenerate": degenerate,
        }
    ce = _cost_params(cfg)
    return {"act_cap": ce.act_cap}


def _screen_params(cfg) -> extensions.ScreenDesignParams:
    try:
        return extensions.ScreenDesignParams(
            alpha0=cfg.params["alpha0"],
            p_treated=cfg.params["p_treated"],
            p_untreated=cfg.params["p_untreated"],
            cost=cfg.params["cost"],
            curve=build_curve(cfg.phi),
        )
    except ValueError as exc:
        raise ConfigError("params", str(exc)) from exc


def _cost_params(cfg) -> extensions.CostExampleParams:
    try:
        return extensions.CostExampleParams(
            cost_high=cfg.params["cost_high"],
            cost_low=cfg.params["cost_low"],
            prior_high=cfg.params["prior_high"],
            fee=cfg.params.get("fee", 0.0),
            payoff_action=cfg.params.get("payoff_action", 1.0),
            payoff_inaction=cfg.params.get("payoff_inaction", 0.0),
        )
    except ValueError as exc:
        raise ConfigError("params", str(exc)) from exc


def run_solve(cfg: RunConfig) -> dict:
    out = {"variant": cfg.variant, "seed": cfg.seed}
    if cfg.variant in ("main", "main-with-pc"):
        params = build_model(cfg)
        curve = build_curve(cfg.phi)
        sol = (
            exante.solve_with_optout(params, curve, root_tol=cfg.root_tol)
            if cfg.variant == "main-with-pc"
            else exante.solve_exante(params, curve, root_tol=cfg.root_tol)
        )
        out.update(exante.to_report(sol).to_dict())
        out["thresholds"] = run_thresholds(cfg)
    elif cfg.variant == "unconditional":
        params = build_model(cfg)
        curve = build_curve(cfg.phi)
        sol = interim.solve_interim_unconditional(params.prior, params, curve)
        out.update(_interim_dict(sol))
    elif cfg.variant == "physical-cost":
        params = build_model(cfg)
        fp = extensions.FeeModelParams(base=params, fee=cfg.params.get("fee", 0.0))
        sol = extensions.solve_fee_model(fp)
        out.update(exante.to_report(sol).to_dict())
        out["thresholds"] = run_thresholds(cfg)
    elif cfg.variant == "test-design":
        tp = _screen_params(cfg)
        sol = extensions.solve_screen_design(tp)
        out.update(
            {
                "benefits": sol.benefits,
                "signal": [{"posterior": m, "weight": w} for m, w in sol.signal],
                "upper": sol.upper,
                "lower": sol.lower,
                "bad_news_prob": sol.bad_news_prob,
                "doctor_value": sol.doctor_value,
                "patient_value": sol.patient_value,
                "pc_slack": sol.pc_slack,
                "thresholds": run_thresholds(cfg),
            }
        )
    else:
        ce = _cost_params(cfg)
        sol = extensions.solve_cost_example(ce)
        out.update(
            {
                "persuades": sol.persuades,
                "signal": [{"posterior": m, "weight": w} for m, w in sol.signal],
                "lower": sol.lower,
                "sender_value": sol.sender_value,
                "pc_residual": sol.pc_residual,
                "thresholds": run_thresholds(cfg),
            }
        )
    return out


def _interim_dict(sol: interim.InterimSolution) -> dict:
    return {
        "regime": "CommittedComfort" if sol.accepts else "UnableToPersuade",
        "region": sol.region.value,
        "accept_signal": [{"posterior": m, "weight": w} for m, w in sol.accept_signal],
        "reject_signal": [{"posterior": m, "weight": w} for m, w in sol.reject_signal],
        "doctor_value": sol.doctor_value,
        "patient_value": sol.patient_value,
        "pc_slack": sol.pc_slack,
    }


SWEEP_COLUMNS = [
    "point", "regime", "region", "doctor_value", "patient_value", "pc_slack",
    "accept_atoms", "accept_weights", "reject_atoms", "reject_weights",
]
SWEEP_COLUMNS_TD = [
    "point", "benefits", "upper", "lower", "bad_news_prob",
    "doctor_value", "patient_value", "pc_slack",
]


def _fmt_atoms(lot):
    return "|".join(f"{m:.12g}" for m, _ in lot)


def _fmt_weights(lot):
    return "|".join(f"{w:.12g}" for _, w in lot)


def run_sweep(cfg: RunConfig, jobs: int = 1):
    """One row per sweep point; thresholds go into the side channel since
    they are constant across the sweep."""
    if cfg.sweep is None:
        raise ConfigError("sweep", "missing sweep section")
    start = float(cfg.sweep.get("start", 0.0))
    stop = float(cfg.sweep.get("stop", 1.0))
    steps = int(cfg.sweep.get("steps", 201))
    grid = np.linspace(start, stop, steps) if steps > 0 else np.array([])

    if cfg.variant == "test-design":
        header = SWEEP_COLUMNS_TD
        tp0 = _screen_params(cfg)
        screen_caps = extensions.screen_design_thresholds(tp0)

        def row(a0):
            tp = extensions.ScreenDesignParams(
                alpha0=float(a0), p_treated=tp0.p_treated,
                p_untreated=tp0.p_untreated, cost=tp0.cost, curve=tp0.curve,
            )
            s = extensions.solve_screen_design(tp, thresholds=screen_caps)
            return [f"{a0:.12g}", str(s.benefits), f"{s.upper:.12g}",
                    f"{s.lower:.12g}", f"{s.bad_news_prob:.12g}",
                    f"{s.doctor_value:.12g}", f"{s.patient_value:.12g}",
                    f"{s.pc_slack:.12g}"]
    elif cfg.variant in ("main", "unconditional"):
        params = build_model(cfg)
        curve = build_curve(cfg.phi)
        mode = "unconditional" if cfg.variant == "unconditional" else "conditional"
        solver = interim.InterimSolver(params, curve, mode, root_tol=cfg.root_tol)
        header = SWEEP_COLUMNS

        def row(mu):
            s = solver.solve(float(mu))
            regime = "CommittedComfort" if s.accepts else "UnableToPersuade"
            return [f"{mu:.12g}", regime, s.region.value,
                    f"{s.doctor_value:.12g}", f"{s.patient_value:.12g}",
                    f"{s.pc_slack:.12g}", _fmt_atoms(s.accept_signal),
                    _fmt_weights(s.accept_signal), _fmt_atoms(s.reject_signal),
                    _fmt_weights(s.reject_signal)]
    elif cfg.variant in ("main-with-pc", "physical-cost"):
        header = SWEEP_COLUMNS

        def row(mu):
            params0 = build_model(cfg)
            params = ModelParams(
                alpha=params0.alpha, p_treated=params0.p_treated,
                p_good=params0.p_good, p_bad=params0.p_bad,
                cost=params0.cost, prior=float(mu),
            )
            if cfg.variant == "physical-cost":
                fp = extensions.FeeModelParams(base=params, fee=cfg.params.get("fee", 0.0))
                s = extensions.solve_fee_model(fp)
            else:
                s = exante.solve_with_optout(params, build_curve(cfg.phi),
                                             root_tol=cfg.root_tol)
            atom0, sol0 = s.interim[0]
            return [f"{mu:.12g}", s.regime.value, sol0.region.value,
                    f"{s.doctor_value:.12g}", f"{s.patient_value:.12g}",
                    f"{s.optout_slack if s.optout_slack is not None else sol0.pc_slack:.12g}",
                    _fmt_atoms(s.lottery), _fmt_weights(s.lottery),
                    _fmt_atoms(sol0.reject_signal), _fmt_weights(sol0.reject_signal)]
    else:
        raise ConfigError("sweep", f"variant {cfg.variant} has no sweep")

    pts = [float(x) for x in grid]
    if jobs > 1 and pts:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(row, pts))
    else:
        rows = [row(x) for x in pts]
    return header, rows


def run_verify(cfg: RunConfig, lower_offset: float = 0.0):
    """Cross-checks for the configured instance.  ``lower_offset`` shifts
    the solver's binding lower atom before re-checking the constraint; it
    exists so the negative control can prove the checks have teeth."""
    if cfg.variant not in ("main", "main-with-pc"):
        raise ConfigError("variant", "verify runs on the main variants")
    params = build_model(cfg)
    curve = build_curve(cfg.phi)
    rng = np.random.default_rng(cfg.seed)
    lines = [f"seed: {cfg.seed}", f"variant: {cfg.variant}"]
    ok = True

    solver = interim.InterimSolver(params, curve)
    th = solver.thresholds()

    # 1. oracle sandwich at a handful of beliefs
    from .model import sick_recovery, skip_value_revealed, accept_value, untreated_recovery

    doctor_fn = lambda m: params.alpha + (1.0 - params.alpha) * sick_recovery(m, params)
    accept_fn = lambda m: accept_value(m, params, curve)
    worst = 0.0
    for mu1 in rng.uniform(0.05, 0.95, 5):
        sol = solver.solve(float(mu1))
        res = oracle.grid_signal_oracle(
            float(mu1), doctor_fn, accept_fn,
            skip_value_revealed(mu1, params, curve), grid_n=cfg.oracle_grid,
        )
        refusal = params.alpha + (1.0 - params.alpha) * untreated_recovery(mu1, params)
        best = max(res.best_value, refusal) if res.feasible else refusal
        worst = max(worst, abs(sol.doctor_value - best))
    tol = 1e-4 + 1.5 / cfg.oracle_grid
    ok &= worst <= tol
    lines.append(f"oracle_sandwich: residual={worst:.3e} tol={tol:.3e} "
                 f"{'pass' if worst <= tol else 'FAIL'}")

    # 2. constraint binding in the binding regions
    worst = 0.0
    checked = 0
    for mu1 in np.linspace(0.02, 0.98, 33):
        sol = solver.solve(float(mu1))
        if sol.region in (model.Region.WARN, model.Region.COMFORT):
            sig = sol.accept_signal
            if lower_offset and len(sig) == 2:
                lo, hi = sig.support
                lo2 = min(max(lo + lower_offset, 0.0), float(mu1))
                sig = model.PosteriorLottery.binary(float(mu1), lo2, hi)
            gap = abs(
                sig.expect(lambda m: accept_value(m, params, curve))
                - skip_value_revealed(mu1, params, curve)
            )
            worst = max(worst, gap)
            checked += 1
    binding_ok = worst <= 1e-8 or checked == 0
    ok &= binding_ok
    lines.append(f"pc_binding: residual={worst:.3e} checked={checked} "
                 f"{'pass' if binding_ok else 'FAIL'}")

    # 3. monotone binding atoms
    rep = interim.monotonicity_report(solver)
    ok &= rep["ok"]
    lines.append(f"monotonicity: violations={len(rep['violations'])} "
                 f"{'pass' if rep['ok'] else 'FAIL'}")

    # 4. envelope idempotence on the accept payoff
    env1 = concave_envelope(accept_fn, 0.0, 1.0, 513)
    env2 = concave_envelope(env1, 0.0, 1.0, 513)
    gap = float(np.max(np.abs(env1.values - env2.values)))
    ok &= gap <= 1e-9
    lines.append(f"envelope_idempotent: residual={gap:.3e} "
                 f"{'pass' if gap <= 1e-9 else 'FAIL'}")

    # 5. Monte Carlo consistency
    sol = (
        exante.solve_with_optout(params, curve)
        if cfg.variant == "main-with-pc"
        else exante.solve_exante(params, curve)
    )
    est, se = oracle.simulate_health(
        exante.to_report(sol), params, curve, cfg.mc_draws, seed=cfg.seed
    )
    z = (est - sol.doctor_value) / max(se, 1e-12)
    ok &= abs(z) <= 4.0
    lines.append(f"monte_carlo: z={z:+.2f} draws={cfg.mc_draws} "
                 f"{'pass' if abs(z) <= 4.0 else 'FAIL'}")

    lines.append(f"thresholds: {json.dumps(th.to_dict(), sort_keys=True)}")
    return lines, ok


# ---------------------------------------------------------------------
# click wiring
# ---------------------------------------------------------------------


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _apply_overrides(cfg, seed, grid, variant):
    if seed is not None:
        cfg.seed = int(seed)
    if grid is not None:
        cfg.solver["grid_n"] = int(grid)
    if variant is not None:
        if variant not in VARIANTS:
            raise ConfigError("variant", f"must be one of {', '.join(VARIANTS)}")
        cfg.variant = variant
    return cfg


_common = [
    click.option("--config", "config_path", required=True, type=click.Path(exists=True)),
    click.option("--out", "out_path", default=None, type=click.Path()),
    click.option("--seed", default=None, type=int),
    click.option("--grid", default=None, type=int),
    click.option("--variant", default=None),
]


def _with_common(fn):
    for deco in reversed(_common):
        fn = deco(fn)
    return fn


@click.group()
def main():
    """Optimal information-disclosure policy solver."""
    level = os.environ.get("INFOPOLICY_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _guard(fn):
    try:
        return fn()
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except ValueError as exc:
        # solver-level validation (e.g. a kinked curve on a variant whose
        # opening characterization needs a concave one)
        click.echo(f"error: config error at phi/params: {exc}", err=True)
        sys.exit(2)


@main.command()
@_with_common
def solve(config_path, out_path, seed, grid, variant):
    """Solve the configured instance and emit a JSON report."""

    def body():
        cfg = _apply_overrides(load_config(config_path), seed, grid, variant)
        report = run_solve(cfg)
        _emit(json.dumps(report, sort_keys=True, indent=2) + "\n",
              out_path or cfg.out)

    _guard(body)


@main.command()
@_with_common
@click.option("--jobs", default=1, type=int)
def sweep(config_path, out_path, seed, grid, variant, jobs):
    """Sweep the configured variable and emit CSV rows."""

    def body():
        cfg = _apply_overrides(load_config(config_path), seed, grid, variant)
        header, rows = run_sweep(cfg, jobs=jobs)
        text = ",".join(header) + "\n" + "".join(",".join(r) + "\n" for r in rows)
        _emit(text, out_path or cfg.out)

    _guard(body)


@main.command()
@_with_common
@click.option("--debug-lower-offset", default=0.0, type=float, hidden=True)
def verify(config_path, out_path, seed, grid, variant, debug_lower_offset):
    """Run the verification suite; nonzero exit on any failed check."""

    def body():
        cfg = _apply_overrides(load_config(config_path), seed, grid, variant)
        lines, ok = run_verify(cfg, lower_offset=debug_lower_offset)
        _emit("\n".join(lines) + "\n", out_path or cfg.out)
        if not ok:
            sys.exit(1)

    _guard(body)


@main.command()
@_with_common
def thresholds(config_path, out_path, seed, grid, variant):
    """Emit the instance's critical beliefs as JSON."""

    def body():
        cfg = _apply_overrides(load_config(config_path), seed, grid, variant)
        _emit(json.dumps(run_thresholds(cfg), sort_keys=True, indent=2) + "\n",
              out_path or cfg.out)

    _guard(body)


if __name__ == "__main__":
    main()
