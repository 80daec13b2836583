"""Domain types and pure evaluation of the payment-game objectives.

Two parties split a patient panel between fee-for-service (FFS) and
capitation.  The insurer picks the FFS *patient* share f1, the practice
picks the FFS *visit* share f2.  A dimensionless performance metric z,
decreasing in the FFS intensity f1^a * f2^b, feeds a bonus transfer
phi = clip(alpha * z) that is added to both the insurer's cost and the
practice's profit.

Every evaluator comes in two forms: a typed one operating on a
:class:`FractionPair`, and an ``*_at`` form taking raw floats or numpy
arrays (used by the solver's vectorized scans and by the grid oracle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
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
]


class ConstraintError(ValueError):
    """A domain-type invariant was violated."""


def _require(ok: bool, constraint: str) -> None:
    if not ok:
        raise ConstraintError(f"constraint violated: {constraint}")


@dataclass(frozen=True)
class ModelParams:
    """Annual economic constants of the insurer-practice relationship.

    Defaults are the estimated values used throughout: p patients per
    practice, per-patient visit counts n_f / n_c, revenues r_f (per FFS
    visit) and r_c (per capitation patient), hospitalization costs h_f /
    h_c borne by the insurer, and the practice's delivery costs c_d (per
    FFS visit, doctor) and c_n (per capitation visit, nurse).
    """

    p: float = 1684.0
    n_f: float = 2.24
    n_c: float = 3.44
    r_f: float = 140.41
    r_c: float = 346.32
    h_f: float = 9954.00
    h_c: float = 9861.85
    c_d: float = 63.56
    c_n: float = 24.04

    def __post_init__(self) -> None:
        for name in ("p", "n_f", "n_c", "r_f", "r_c", "h_f", "h_c", "c_d", "c_n"):
            _require(getattr(self, name) > 0, f"{name} > 0")

    @property
    def h_eps(self) -> float:
        """Hospitalization-cost gap h_f - h_c (may be negative in what-ifs)."""
        return self.h_f - self.h_c


@dataclass(frozen=True)
class BonusPolicy:
    """Insurer-set bonus parameters plus the shape of the metric z.

    ``xi = math.inf`` selects the unbounded cut-off, in which case the
    bonus is exactly ``alpha * z`` with no saturation.
    """

    alpha: float
    xi: float = math.inf
    kappa: float = 0.113
    exp_f1: float = 0.5
    exp_f2: float = 2.0

    def __post_init__(self) -> None:
        _require(self.alpha >= 0, "alpha >= 0")
        _require(self.xi > 0, "xi > 0")
        _require(self.kappa > 0, "kappa > 0")
        _require(self.exp_f1 > 0, "exp_f1 > 0")
        _require(self.exp_f2 > 0, "exp_f2 > 0")

    @property
    def xi_unbounded(self) -> bool:
        return math.isinf(self.xi)


@dataclass(frozen=True)
class FractionPair:
    """A decision point: FFS patient share f1 and FFS visit share f2."""

    f1: float
    f2: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "f1", float(self.f1))
        object.__setattr__(self, "f2", float(self.f2))
        _require(0.0 <= self.f1 <= 1.0, "0 <= f1 <= 1")
        _require(0.0 <= self.f2 <= 1.0, "0 <= f2 <= 1")


@dataclass(frozen=True)
class EquilibriumReport:
    """Everything worth knowing about a solved decision point."""

    fractions: FractionPair
    z_value: float
    bonus: float
    insurer_cost_full: float
    insurer_cost_reduced: float
    practice_profit_full: float
    practice_profit_reduced: float
    regime: str  # "interior" | "boundary" | "saturated-linear"


@dataclass(frozen=True)
class GameRound:
    round_index: int
    fractions: FractionPair
    report: EquilibriumReport


@dataclass(frozen=True)
class GameTrace:
    """Per-round records of a repeated game."""

    rounds: tuple[GameRound, ...]
    inflation_rate: float = 1.0

    def final(self) -> GameRound:
        return self.rounds[-1]


# ---------------------------------------------------------------------------
# evaluators (array-transparent `_at` forms plus typed wrappers)
# ---------------------------------------------------------------------------

def perf_metric_at(f1, f2, policy: BonusPolicy):
    """z = kappa * (1 - 2 * f1^a * f2^b); in [-kappa, kappa] on the unit square."""
    return policy.kappa * (1.0 - 2.0 * f1 ** policy.exp_f1 * f2 ** policy.exp_f2)


def bonus_at(z, policy: BonusPolicy):
    """phi(z): alpha*z inside the band [-xi, xi], saturating at +-alpha*xi."""
    if policy.xi_unbounded:
        return policy.alpha * z
    return policy.alpha * np.clip(z, -policy.xi, policy.xi)


def insurer_cost_full_at(f1, f2, params: ModelParams, policy: BonusPolicy):
    """All five insurer cost components: FFS visit revenue outflow,
    capitation outflow, both hospitalization pools, and the bonus."""
    base = (f1 * params.p * f2 * params.n_f * params.r_f
            + (1.0 - f1) * params.p * params.r_c
            + f1 * params.p * params.h_f
            + (1.0 - f1) * params.p * params.h_c)
    return base + bonus_at(perf_metric_at(f1, f2, policy), policy)


def insurer_cost_reduced_at(f1, f2, params: ModelParams, policy: BonusPolicy):
    """Decision-relevant insurer cost; drops the constant p*(r_c + h_c)."""
    core = f1 * params.p * (f2 * params.n_f * params.r_f - params.r_c + params.h_eps)
    return core + bonus_at(perf_metric_at(f1, f2, policy), policy)


def practice_profit_full_at(f1, f2, params: ModelParams, policy: BonusPolicy):
    base = (f1 * params.p * f2 * params.n_f * params.r_f
            + (1.0 - f1) * params.p * params.r_c
            - f1 * params.p * f2 * params.n_f * params.c_d
            - (1.0 - f1) * params.p * (1.0 - f2) * params.n_c * params.c_n)
    return base + bonus_at(perf_metric_at(f1, f2, policy), policy)


def practice_profit_reduced_at(f1, f2, params: ModelParams, policy: BonusPolicy):
    """Decision-relevant practice profit; drops (1-f1)*p*(r_c - n_c*c_n).

    The f2 coefficient p*(n_f*f1*(r_f - c_d) + n_c*c_n*(1 - f1)) is the
    practice's marginal gain from shifting visits to FFS.
    """
    coef = params.p * (params.n_f * f1 * (params.r_f - params.c_d)
                       + params.n_c * params.c_n * (1.0 - f1))
    return f2 * coef + bonus_at(perf_metric_at(f1, f2, policy), policy)


def perf_metric(fp: FractionPair, policy: BonusPolicy) -> float:
    return float(perf_metric_at(fp.f1, fp.f2, policy))


def bonus(z: float, policy: BonusPolicy) -> float:
    return float(bonus_at(z, policy))


def insurer_cost_full(fp: FractionPair, params: ModelParams, policy: BonusPolicy) -> float:
    return float(insurer_cost_full_at(fp.f1, fp.f2, params, policy))


def insurer_cost_reduced(fp: FractionPair, params: ModelParams, policy: BonusPolicy) -> float:
    return float(insurer_cost_reduced_at(fp.f1, fp.f2, params, policy))


def practice_profit_full(fp: FractionPair, params: ModelParams, policy: BonusPolicy) -> float:
    return float(practice_profit_full_at(fp.f1, fp.f2, params, policy))


def practice_profit_reduced(fp: FractionPair, params: ModelParams, policy: BonusPolicy) -> float:
    return float(practice_profit_reduced_at(fp.f1, fp.f2, params, policy))


def make_report(f1: float, f2: float, params: ModelParams, policy: BonusPolicy) -> EquilibriumReport:
    """Evaluate every report field at (f1, f2) and attach the regime label.

    "interior" is reserved for points strictly inside the unit square.
    Non-interior points are "saturated-linear" when the bonus term cannot
    steer the objectives (alpha = 0, or z saturated at the cut-off), and
    plain "boundary" otherwise.
    """
    fp = FractionPair(f1, f2)
    z = perf_metric(fp, policy)
    if 0.0 < f1 < 1.0 and 0.0 < f2 < 1.0:
        regime = "interior"
    elif policy.alpha == 0.0 or (not policy.xi_unbounded and abs(z) >= policy.xi):
        regime = "saturated-linear"
    else:
        regime = "boundary"
    return EquilibriumReport(
        fractions=fp,
        z_value=z,
        bonus=bonus(z, policy),
        insurer_cost_full=insurer_cost_full(fp, params, policy),
        insurer_cost_reduced=insurer_cost_reduced(fp, params, policy),
        practice_profit_full=practice_profit_full(fp, params, policy),
        practice_profit_reduced=practice_profit_reduced(fp, params, policy),
        regime=regime,
    )
