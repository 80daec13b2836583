"""Sweeps and regime analytics over the solved game.

The alpha sweep reproduces the bonus-slope figure data: one repeated
game per alpha on an inclusive grid, recording the final round.  The
h_eps threshold and the equilibrium classifier back the corner-regime
case analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import BonusPolicy, ConstraintError, EquilibriumReport, ModelParams
from .solver import SolveSettings, play_repeated

__all__ = ["SweepRow", "sweep_alpha", "h_eps_threshold", "classify_equilibrium"]


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    f1: float
    f2: float
    z_value: float
    bonus: float
    regime: str
    rounds: int


def sweep_alpha(
    alpha_min: float,
    alpha_max: float,
    step: float,
    rounds: int = 1,
    params: ModelParams | None = None,
    settings: SolveSettings | None = None,
    base_policy: BonusPolicy | None = None,
    inflation_rate: float = 1.0,
) -> list[SweepRow]:
    """Solve the repeated game for every alpha on the inclusive grid
    [alpha_min, alpha_max] with spacing ``step``, cut-off unbounded.

    ``base_policy`` supplies kappa and the exponents when given; its
    alpha and xi are ignored.  Rows come back in alpha order.  A
    single-point sweep (alpha_min == alpha_max) is allowed.
    """
    if alpha_min < 0.0 or alpha_max < alpha_min or step <= 0.0:
        raise ConstraintError("constraint violated: 0 <= alpha_min <= alpha_max, step > 0")
    params = params or ModelParams()
    settings = settings or SolveSettings()

    alphas = []
    k = 0
    while True:
        a = alpha_min + k * step
        if a > alpha_max + step * 1e-9:
            break
        alphas.append(min(a, alpha_max))
        k += 1

    rows: list[SweepRow] = []
    for a in alphas:
        if base_policy is None:
            policy = BonusPolicy(alpha=a)
        else:
            policy = BonusPolicy(alpha=a, kappa=base_policy.kappa,
                                 exp_f1=base_policy.exp_f1, exp_f2=base_policy.exp_f2)
        trace = play_repeated(rounds, params, policy, settings, inflation_rate)
        rep = trace.final().report
        rows.append(SweepRow(
            alpha=a,
            f1=rep.fractions.f1,
            f2=rep.fractions.f2,
            z_value=rep.z_value,
            bonus=rep.bonus,
            regime=rep.regime,
            rounds=rounds,
        ))
    return rows


def h_eps_threshold(params: ModelParams) -> float:
    """The h_eps value where the insurer's linear-regime coefficient at
    f2 = 1 changes sign: r_c - n_f * r_f.  Below it the corner flips to
    f1 = 1."""
    return params.r_c - params.n_f * params.r_f


def classify_equilibrium(report: EquilibriumReport, tol: float = 1e-6) -> str:
    """Name the binding boundaries of a solved point.

    Returns "interior" when both fractions lie in (tol, 1 - tol),
    otherwise "f1-boundary", "f2-boundary", or "corner".
    """
    if not 0.0 < tol < 0.5:
        raise ConstraintError("constraint violated: 0 < tol < 0.5")
    f1 = report.fractions.f1
    f2 = report.fractions.f2
    f1_extreme = f1 <= tol or f1 >= 1.0 - tol
    f2_extreme = f2 <= tol or f2 >= 1.0 - tol
    if f1_extreme and f2_extreme:
        return "corner"
    if f1_extreme:
        return "f1-boundary"
    if f2_extreme:
        return "f2-boundary"
    return "interior"
