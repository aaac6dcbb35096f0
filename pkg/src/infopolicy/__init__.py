"""Optimal information-disclosure policies for a test-averse receiver.

The package solves, classifies, and independently verifies disclosure
policies in a two-stage consultation: an opening signal before the test
decision and a committed follow-up signal afterwards.
"""

from .backends import BACKEND
from .envelope import (
    EnvelopeResult,
    TangencyResult,
    chord_crossing,
    concave_envelope,
    convex_minorant,
    split_concave_envelope,
    tangent_from_point,
)
from .exante import (
    ExAnteSolution,
    classify_regime,
    full_thresholds,
    pool_to_recommendation,
    solve_exante,
    solve_with_optout,
    to_report,
    visit_thresholds,
)
from .extensions import (
    CostExampleParams,
    FeeModelParams,
    ScreenDesignParams,
    ScreenDesignSolution,
    best_lower_belief,
    fee_caps,
    solve_cost_example,
    solve_fee_interim,
    solve_fee_model,
    solve_screen_design,
    screen_design_thresholds,
)
from .interim import (
    InterimSolution,
    InterimSolver,
    doctor_favorite_signal,
    interim_health,
    monotonicity_report,
    patient_favorite_signal,
    solve_interim,
    solve_interim_general,
    solve_interim_unconditional,
)
from .model import (
    AnticipationCurve,
    ModelParams,
    PolicyReport,
    PosteriorLottery,
    Regime,
    Region,
    Thresholds,
    consult_value,
    fear_criterion_slack,
    reacts_to_fear,
    sick_recovery,
    skip_value,
    skip_value_revealed,
    accept_value,
    treat_cap,
    untreated_recovery,
)
from .oracle import (
    OracleResult,
    best_good_news_criterion,
    grid_signal_oracle,
    max_feasible_upper,
    random_instance,
    simulate_health,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
