"""Insurer/practice contract games over blended FFS-capitation payment.

An insurer picks the fee-for-service share ``f1`` of its payment mix, a
physician practice answers with the share ``f2`` of patients it treats
under fee-for-service, and a quality-linked bonus transfers money
between them.  The package bundles the cost/profit model, equilibrium
solvers, sweep/threshold analysis, and an independent brute-force oracle
for checking the solvers, plus a small command line front end
(``python -m ffscap.cli`` or the ``ffscap`` script).
"""

from .analysis import SweepRow, classify_equilibrium, h_eps_threshold, sweep_alpha
from .model import (
    BonusPolicy,
    ConstraintError,
    EquilibriumReport,
    FractionPair,
    GameRound,
    GameTrace,
    ModelParams,
    bonus,
    bonus_at,
    insurer_cost_full,
    insurer_cost_full_at,
    insurer_cost_reduced,
    insurer_cost_reduced_at,
    make_report,
    perf_metric,
    perf_metric_at,
    practice_profit_full,
    practice_profit_full_at,
    practice_profit_reduced,
    practice_profit_reduced_at,
)
from .oracle import OracleReport, oracle_best_response, oracle_stackelberg
from .solver import (
    SolveSettings,
    best_response_f2,
    play_repeated,
    scalar_optimize,
    solve_linear_regime,
    solve_stackelberg,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ConstraintError",
    "ModelParams",
    "BonusPolicy",
    "FractionPair",
    "EquilibriumReport",
    "GameRound",
    "GameTrace",
    "perf_metric",
    "perf_metric_at",
    "bonus",
    "bonus_at",
    "insurer_cost_full",
    "insurer_cost_full_at",
    "insurer_cost_reduced",
    "insurer_cost_reduced_at",
    "practice_profit_full",
    "practice_profit_full_at",
    "practice_profit_reduced",
    "practice_profit_reduced_at",
    "make_report",
    "SolveSettings",
    "scalar_optimize",
    "best_response_f2",
    "solve_stackelberg",
    "solve_linear_regime",
    "play_repeated",
    "SweepRow",
    "sweep_alpha",
    "h_eps_threshold",
    "classify_equilibrium",
    "OracleReport",
    "oracle_stackelberg",
    "oracle_best_response",
]
