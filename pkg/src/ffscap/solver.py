"""Equilibrium computation: follower best response, the one-round game,
the saturated-linear regime, and the repeated game.

The one-round solution is a mutual-best-response point: a fixed point of
the composed map T(f1) = argmin_f1' cost(f1', R(f1)) where R is the
practice's best response.  T is continuous on [0, 1] for the default
exponents, so a fixed point always exists even where naive alternation
of best responses would cycle; it is located by a vectorized sign scan
of h(x) = T(x) - x plus bisection.  When the bonus cut-off carves the
payoffs into pieces there can be several fixed points, and the one with
the lowest insurer cost is reported (ties toward smaller f1) -- a
deterministic selection, unlike whichever point an alternating path
happens to fall into.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import (
    BonusPolicy,
    ConstraintError,
    GameRound,
    GameTrace,
    ModelParams,
    EquilibriumReport,
    insurer_cost_reduced_at,
    make_report,
    practice_profit_reduced_at,
)

__all__ = [
    "SolveSettings",
    "scalar_optimize",
    "best_response_f2",
    "solve_stackelberg",
    "solve_linear_regime",
    "play_repeated",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

#: f1 sample count for the fixed-point sign scan.
_FP_SCAN_POINTS = 1001

#: Follower candidates whose profit comes within this much of the best
#: (relative, with an absolute floor) count as tied, and the smallest f2
#: among them wins.  Near a saturation kink two distant local maxima can
#: sit within float noise of each other; without a tolerance band the
#: reported branch would flip with the last bit of the profit values.
#: The band only has to dominate evaluation noise: the relative part is
#: ~10-100x the rounding of a profit whose scale is set by alpha*kappa,
#: and no wider, because the constant alpha*kappa term inflates |profit|
#: without enlarging the differences that matter.
_TIE_REL = 1e-7
_TIE_ABS = 1e-6

#: Wider tie band used only when reporting the equilibrium f2.  A fixed
#: point can sit exactly where the follower's best branch switches (the
#: map T jumps across the identity there), and at that point the branch
#: values differ by at most the band above times the profit scale; the
#: wider band makes the reported branch the same no matter which side of
#: the switch the located f1 falls on.
_TIE_REL_REPORT = 1e-4
_TIE_ABS_REPORT = 1e-2

#: Row-block size for the vectorized scan passes.
_BLOCK = 128


@dataclass(frozen=True)
class SolveSettings:
    """Knobs for the scan-plus-refine scalar searches."""

    grid_points: int = 10001
    refine_tol: float = 1e-8
    max_refine_iters: int = 200

    def __post_init__(self) -> None:
        if self.grid_points < 3:
            raise ConstraintError("constraint violated: grid_points >= 3")
        if not (0.0 < self.refine_tol < 1e-2):
            raise ConstraintError("constraint violated: 0 < refine_tol < 1e-2")
        if self.max_refine_iters < 1:
            raise ConstraintError("constraint violated: max_refine_iters >= 1")


def scalar_optimize(
    objective: Callable,
    interval: tuple[float, float] = (0.0, 1.0),
    settings: SolveSettings | None = None,
    sense: str = "min",
    vectorized: bool = False,
) -> tuple[float, float]:
    """Deterministic bounded scalar optimization.

    Coarse scan over ``grid_points`` equally spaced samples, then
    golden-section refinement inside the best bracketing sub-interval
    until its width drops below ``refine_tol``.  Ties break toward the
    lower location.  Returns ``(location, value)``.

    ``vectorized=True`` promises that ``objective`` accepts a numpy array
    for the scan phase; otherwise it is called point by point.
    """
    settings = settings or SolveSettings()
    lo, hi = float(interval[0]), float(interval[1])
    if not hi - lo > 0.0:
        raise ConstraintError("constraint violated: interval width > 0")
    if sense not in ("min", "max"):
        raise ConstraintError("constraint violated: sense in {min, max}")
    sgn = 1.0 if sense == "min" else -1.0

    def f(x: float) -> float:
        return sgn * float(objective(x))

    grid = np.linspace(lo, hi, settings.grid_points)
    if vectorized:
        values = sgn * np.asarray(objective(grid), dtype=float)
    else:
        values = np.array([f(x) for x in grid])
    i = int(np.argmin(values))
    a = grid[i - 1] if i > 0 else grid[0]
    b = grid[i + 1] if i < settings.grid_points - 1 else grid[-1]

    c = b - (b - a) * _INV_PHI
    d = a + (b - a) * _INV_PHI
    fc, fd = f(c), f(d)
    iters = 0
    while b - a > settings.refine_tol and iters < settings.max_refine_iters:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * _INV_PHI
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * _INV_PHI
            fd = f(d)
        iters += 1

    x = min((grid[i], a, 0.5 * (a + b), b), key=lambda t: (f(t), t))
    return x, float(objective(x))


def best_response_f2(
    f1: float,
    params: ModelParams,
    policy: BonusPolicy,
    settings: SolveSettings | None = None,
) -> float:
    """The practice's profit-maximizing f2 for a given f1.

    With an unbounded cut-off the objective is f2 * A(f1) plus the smooth
    bonus term, and the interior stationary point has the closed form
    A(f1) / (2 * kappa * alpha * exp_f2 * f1^exp_f1) under the default
    exponents.  The maximum is always attained at the stationary point,
    a saturation breakpoint |z| = xi, or an endpoint, so those candidates
    are enumerated and the best one returned.  Candidates within _TIE_REL
    of the best profit are treated as tied and the smallest f2 wins, so
    the reported branch is stable at knife-edge indifference points where
    two distant maxima agree to within float noise.  alpha = 0 or f1 = 0
    leaves a linear objective decided by the sign of A(f1); positive
    parameters give A > 0 and hence f2 = 1.
    """
    del settings  # closed-form candidate enumeration needs no search knobs
    return _pick_f2(f1, params, policy, _TIE_REL, _TIE_ABS)


def _report_f2(f1: float, params: ModelParams, policy: BonusPolicy) -> float:
    """Follower fraction to report at an equilibrium f1: same candidates
    as :func:`best_response_f2` but selected with the wider tie band."""
    return _pick_f2(f1, params, policy, _TIE_REL_REPORT, _TIE_ABS_REPORT)


def _pick_f2(
    f1: float,
    params: ModelParams,
    policy: BonusPolicy,
    tie_rel: float,
    tie_abs: float,
) -> float:
    if not 0.0 <= f1 <= 1.0:
        raise ConstraintError("constraint violated: 0 <= f1 <= 1")
    coef = params.p * (params.n_f * f1 * (params.r_f - params.c_d)
                      + params.n_c * params.c_n * (1.0 - f1))
    if policy.alpha == 0.0 or f1 == 0.0:
        return 1.0 if coef >= 0.0 else 0.0

    kap, b = policy.kappa, policy.exp_f2
    u = f1 ** policy.exp_f1
    candidates = [0.0, 1.0]
    if b != 1.0:
        t = coef / (2.0 * kap * policy.alpha * b * u)
        if t > 0.0:
            s = t ** (1.0 / (b - 1.0))
            if 0.0 < s < 1.0:
                candidates.append(s)
    if not policy.xi_unbounded:
        # piecewise breakpoints where z crosses +-xi
        for sign in (1.0, -1.0):
            t = (kap - sign * policy.xi) / (2.0 * kap * u)
            if t > 0.0:
                c = t ** (1.0 / b)
                if 0.0 < c < 1.0:
                    candidates.append(c)

    scored = [(practice_profit_reduced_at(f1, c, params, policy), c) for c in candidates]
    best_value = max(v for v, _ in scored)
    tol = max(tie_rel * abs(best_value), tie_abs)
    return min(c for v, c in scored if v >= best_value - tol)


def _best_response_f2_vec(
    f1s: np.ndarray,
    params: ModelParams,
    policy: BonusPolicy,
) -> np.ndarray:
    """``best_response_f2`` over a whole array of f1 values at once.

    Same candidate enumeration and tie rule as the scalar version,
    carried out column-wise with invalid candidates masked to -inf.
    """
    f1s = np.asarray(f1s, dtype=float)
    coef = params.p * (params.n_f * f1s * (params.r_f - params.c_d)
                       + params.n_c * params.c_n * (1.0 - f1s))
    linear = (policy.alpha == 0.0) | (f1s == 0.0)
    n = f1s.shape[0]
    kap, b = policy.kappa, policy.exp_f2
    cands = [np.zeros(n), np.ones(n)]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        u = np.where(f1s > 0.0, f1s, 1.0) ** policy.exp_f1
        if b != 1.0 and policy.alpha > 0.0:
            t = coef / (2.0 * kap * policy.alpha * b * u)
            s = np.where(t > 0.0, np.abs(t) ** (1.0 / (b - 1.0)), np.nan)
            cands.append(np.where((s > 0.0) & (s < 1.0), s, np.nan))
        if not policy.xi_unbounded:
            for sign in (1.0, -1.0):
                t = (kap - sign * policy.xi) / (2.0 * kap * u)
                c = np.where(t > 0.0, np.abs(t) ** (1.0 / b), np.nan)
                cands.append(np.where((c > 0.0) & (c < 1.0), c, np.nan))
    cmat = np.vstack(cands)
    valid = np.isfinite(cmat)
    vmat = np.where(
        valid,
        practice_profit_reduced_at(f1s[None, :], np.where(valid, cmat, 0.0), params, policy),
        -np.inf,
    )
    vmax = vmat.max(axis=0)
    tol = np.maximum(_TIE_REL * np.abs(vmax), _TIE_ABS)
    out = np.where(vmat >= vmax - tol, cmat, 2.0).min(axis=0)
    return np.where(linear, np.where(coef >= 0.0, 1.0, 0.0), out)


def _insurer_step(
    f2: float,
    params: ModelParams,
    policy: BonusPolicy,
    settings: SolveSettings,
    cost_at: Callable = insurer_cost_reduced_at,
) -> float:
    """Myopic leader move: argmin over f1 of the insurer cost at fixed f2.

    Refines two decades past refine_tol so the outer fixed-point loop can
    meet refine_tol itself.
    """
    inner = SolveSettings(
        grid_points=settings.grid_points,
        refine_tol=max(settings.refine_tol * 1e-2, 1e-14),
        max_refine_iters=settings.max_refine_iters,
    )
    x, _ = scalar_optimize(
        lambda g: cost_at(g, f2, params, policy),
        settings=inner,
        vectorized=True,
    )
    return x


def _insurer_step_vec(
    f2s: np.ndarray,
    params: ModelParams,
    policy: BonusPolicy,
    settings: SolveSettings,
    cost_at: Callable = insurer_cost_reduced_at,
) -> np.ndarray:
    """``_insurer_step`` for a batch of f2 values: per-row grid argmin
    followed by element-wise golden-section refinement."""
    f2s = np.asarray(f2s, dtype=float)
    grid = np.linspace(0.0, 1.0, settings.grid_points)
    n = f2s.shape[0]
    best_i = np.empty(n, dtype=int)
    for lo in range(0, n, _BLOCK):
        hi = min(lo + _BLOCK, n)
        costs = cost_at(grid[None, :], f2s[lo:hi, None], params, policy)
        best_i[lo:hi] = np.argmin(costs, axis=1)
    a = grid[np.maximum(best_i - 1, 0)]
    b = grid[np.minimum(best_i + 1, settings.grid_points - 1)]
    tol = max(settings.refine_tol * 1e-2, 1e-14)
    for _ in range(settings.max_refine_iters):
        if not np.any(b - a > tol):
            break
        c = b - (b - a) * _INV_PHI
        d = a + (b - a) * _INV_PHI
        left = cost_at(c, f2s, params, policy) < cost_at(d, f2s, params, policy)
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    # same final four-way compare as the scalar path, ties toward lower x
    tmat = np.vstack([a, grid[best_i], 0.5 * (a + b), b])
    vmat = cost_at(tmat, f2s[None, :], params, policy)
    vmin = vmat.min(axis=0)
    return np.where(vmat <= vmin, tmat, 2.0).min(axis=0)


def _fixed_point_scan(
    params: ModelParams,
    policy: BonusPolicy,
    settings: SolveSettings,
    cost_at: Callable,
) -> tuple[float, float]:
    """Locate fixed points of T(f1) = step(R(f1)) by sign scan + bisection.

    The scan pass over h(x) = T(x) - x is vectorized; exact zeros are
    kept as candidates and every sign-change bracket is sharpened by
    bisection on the exact scalar map.  Multiple fixed points are
    possible; the one with the lowest insurer cost wins, ties toward
    smaller f1.
    """

    def T(x: float) -> float:
        return _insurer_step(best_response_f2(x, params, policy), params, policy,
                             settings, cost_at)

    xs = np.linspace(0.0, 1.0, _FP_SCAN_POINTS)
    f2s = _best_response_f2_vec(xs, params, policy)
    h = _insurer_step_vec(f2s, params, policy, settings, cost_at) - xs

    candidates = [float(xs[i]) for i in np.nonzero(h == 0.0)[0]]
    for i in np.nonzero(h[:-1] * h[1:] < 0.0)[0]:
        a, b = float(xs[i]), float(xs[i + 1])
        ha, hb = T(a) - a, T(b) - b
        if ha == 0.0 or hb == 0.0 or (ha > 0.0) == (hb > 0.0):
            # scan sign came from vectorization noise; keep the better end
            candidates.append(a if abs(ha) <= abs(hb) else b)
            continue
        while b - a > settings.refine_tol:
            m = 0.5 * (a + b)
            hm = T(m) - m
            if hm == 0.0:
                a = b = m
                break
            if (ha > 0.0) == (hm > 0.0):
                a, ha = m, hm
            else:
                b = m
        candidates.append(0.5 * (a + b))
    if not candidates:
        candidates = [float(xs[int(np.argmin(np.abs(h)))])]

    def scored(x: float) -> tuple[float, float, float]:
        f2 = _report_f2(x, params, policy)
        return float(cost_at(x, f2, params, policy)), x, f2

    _, f1, f2 = min(scored(x) for x in set(candidates))
    return f1, f2


def _solve_fractions(
    params: ModelParams,
    policy: BonusPolicy,
    settings: SolveSettings,
    cost_at: Callable = insurer_cost_reduced_at,
) -> tuple[float, float]:
    """Mutual-best-response fractions via the global fixed-point scan."""
    return _fixed_point_scan(params, policy, settings, cost_at)


def solve_stackelberg(
    params: ModelParams,
    policy: BonusPolicy,
    settings: SolveSettings | None = None,
) -> EquilibriumReport:
    """Solve the one-round game: the insurer's f1 and the practice's
    responding f2 at the lowest-cost mutual-best-response point."""
    settings = settings or SolveSettings()
    f1, f2 = _solve_fractions(params, policy, settings)
    return make_report(f1, f2, params, policy)


def solve_linear_regime(
    params: ModelParams,
    f2_override: float | None = None,
) -> EquilibriumReport:
    """The bonus-free regime, solved analytically.

    Without an override the practice's linear objective has the strictly
    positive slope A(f1), so f2 = 1, and the insurer zeroes f1 exactly
    when its cost coefficient p*(f2*n_f*r_f - r_c + h_eps) is positive
    (ties go to f1 = 0).  With ``f2_override`` the follower step is
    skipped and only the insurer's corner response to that f2 is
    reported.  The report carries a zero-bonus policy.
    """
    if f2_override is not None and not 0.0 <= f2_override <= 1.0:
        raise ConstraintError("constraint violated: 0 <= f2_override <= 1")
    f2 = 1.0 if f2_override is None else float(f2_override)
    coef = f2 * params.n_f * params.r_f - params.r_c + params.h_eps
    f1 = 0.0 if coef > 0.0 else 1.0
    if coef == 0.0:
        f1 = 0.0
    return make_report(f1, f2, params, BonusPolicy(alpha=0.0))


def play_repeated(
    rounds: int,
    params: ModelParams,
    policy: BonusPolicy,
    settings: SolveSettings | None = None,
    inflation_rate: float = 1.0,
) -> GameTrace:
    """Repeated game: round 1 is the one-round solve; each later round
    the insurer re-optimizes f1 against the previous f2, then the
    practice responds.  ``inflation_rate`` multiplies r_f and r_c at the
    start of every round after the first (compounding).
    """
    if rounds < 1:
        raise ConstraintError("constraint violated: rounds >= 1")
    settings = settings or SolveSettings()

    f1, f2 = _solve_fractions(params, policy, settings)
    round_params = params
    first = make_report(f1, f2, params, policy)
    records = [GameRound(1, first.fractions, first)]
    for k in range(2, rounds + 1):
        if inflation_rate != 1.0:
            round_params = ModelParams(
                p=round_params.p,
                n_f=round_params.n_f,
                n_c=round_params.n_c,
                r_f=round_params.r_f * inflation_rate,
                r_c=round_params.r_c * inflation_rate,
                h_f=round_params.h_f,
                h_c=round_params.h_c,
                c_d=round_params.c_d,
                c_n=round_params.c_n,
            )
        f1 = _insurer_step(f2, round_params, policy, settings)
        f2 = best_response_f2(f1, round_params, policy)
        report = make_report(f1, f2, round_params, policy)
        records.append(GameRound(k, report.fractions, report))
    return GameTrace(rounds=tuple(records), inflation_rate=inflation_rate)
