"""Solver behavior: best response, equilibria, repeated play, invariants."""

import math

import numpy as np
import pytest

from ffscap.model import (
    BonusPolicy,
    ConstraintError,
    ModelParams,
    insurer_cost_full_at,
    insurer_cost_reduced_at,
    practice_profit_reduced_at,
)
from ffscap.solver import (
    SolveSettings,
    _solve_fractions,
    best_response_f2,
    play_repeated,
    scalar_optimize,
    solve_linear_regime,
    solve_stackelberg,
)

P = ModelParams()
BASE = BonusPolicy(alpha=682000.0)


def perturbed(rng):
    """ModelParams with every field jittered +/-20%."""
    fields = ("p", "n_f", "n_c", "r_f", "r_c", "h_f", "h_c", "c_d", "c_n")
    return ModelParams(**{f: getattr(P, f) * (1.0 + rng.uniform(-0.2, 0.2))
                          for f in fields})


# ---------------------------------------------------------------------------
# scalar_optimize
# ---------------------------------------------------------------------------

def test_scalar_optimize_quadratic_min():
    x, v = scalar_optimize(lambda t: (t - 0.3) ** 2)
    assert x == pytest.approx(0.3, abs=1e-8)
    assert v == pytest.approx(0.0, abs=1e-15)


def test_scalar_optimize_quadratic_max():
    x, v = scalar_optimize(lambda t: t * (1.0 - t), sense="max")
    assert x == pytest.approx(0.5, abs=1e-8)
    assert v == pytest.approx(0.25, abs=1e-12)


def test_scalar_optimize_linear_hits_boundary():
    x, v = scalar_optimize(lambda t: 5.0 * t)
    assert x == 0.0
    assert v == 0.0


def test_scalar_optimize_rejects_degenerate_interval():
    with pytest.raises(ConstraintError, match="interval width"):
        scalar_optimize(lambda t: t, interval=(0.5, 0.5))
    with pytest.raises(ConstraintError, match="sense"):
        scalar_optimize(lambda t: t, sense="best")


# ---------------------------------------------------------------------------
# best_response_f2
# ---------------------------------------------------------------------------

def test_best_response_near_headline_point():
    assert best_response_f2(0.9536, P, BASE) == pytest.approx(0.9397, abs=5e-4)


def test_best_response_linear_cases_return_one():
    assert best_response_f2(0.3, P, BonusPolicy(alpha=0.0)) == 1.0
    assert best_response_f2(0.0, P, BASE) == 1.0
    # near-zero f1: the 1/sqrt(f1) term pushes the stationary point past 1
    assert best_response_f2(1e-6, P, BASE) == 1.0


def test_best_response_matches_closed_form_at_huge_alpha():
    # A(1)/(0.452 * alpha) with A(1) = p*n_f*(r_f - c_d)
    a1 = P.p * P.n_f * (P.r_f - P.c_d)
    expected = a1 / (0.452 * 1e9)
    got = best_response_f2(1.0, P, BonusPolicy(alpha=1e9))
    assert got == pytest.approx(expected, rel=1e-9)
    assert got == pytest.approx(6.41e-4, abs=5e-7)


def test_best_response_rejects_bad_f1():
    with pytest.raises(ConstraintError, match="0 <= f1 <= 1"):
        best_response_f2(1.5, P, BASE)


def test_follower_consistency_against_dense_grid():
    """1,000 random (f1, params, alpha) draws vs. a 1e5-point argmax."""
    rng = np.random.default_rng(101)
    grid = np.linspace(0.0, 1.0, 100_001)
    step = 1.0 / 100_000
    for _ in range(1000):
        params = perturbed(rng)
        f1 = float(rng.uniform(1e-3, 1.0))
        policy = BonusPolicy(alpha=10 ** rng.uniform(4.0, 7.0))
        got = best_response_f2(f1, params, policy)
        assert 0.0 <= got <= 1.0
        ref = grid[int(np.argmax(
            practice_profit_reduced_at(f1, grid, params, policy)))]
        assert abs(got - ref) <= 2.0 * step


def test_best_response_nonincreasing_in_alpha():
    alphas = np.geomspace(1e4, 1e8, 25)
    for f1 in (0.05, 0.3, 0.7, 1.0):
        values = [best_response_f2(f1, P, BonusPolicy(alpha=a)) for a in alphas]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
        # where the response is interior it scales exactly as 1/alpha
        interior = [(a, v) for a, v in zip(alphas, values) if 0.0 < v < 1.0]
        for (a1_, v1), (a2_, v2) in zip(interior, interior[1:]):
            assert v1 * a1_ == pytest.approx(v2 * a2_, rel=1e-9)


# ---------------------------------------------------------------------------
# solve_stackelberg
# ---------------------------------------------------------------------------

def test_solve_default_equilibrium():
    rep = solve_stackelberg(P, BASE)
    assert rep.fractions.f1 == pytest.approx(0.95274385, abs=1e-6)
    assert rep.fractions.f2 == pytest.approx(0.93977989, abs=1e-6)
    assert rep.bonus == pytest.approx(-55805.91, abs=0.05)
    assert rep.regime == "interior"


def test_solve_zero_alpha_is_the_linear_corner():
    rep = solve_stackelberg(P, BonusPolicy(alpha=0.0))
    assert (rep.fractions.f1, rep.fractions.f2) == (0.0, 1.0)
    assert rep.bonus == 0.0
    assert rep.regime == "saturated-linear"


def test_solve_tiny_cutoff_saturates_to_linear_corner():
    rep = solve_stackelberg(P, BonusPolicy(alpha=682000.0, xi=0.001))
    assert (rep.fractions.f1, rep.fractions.f2) == (0.0, 1.0)
    assert abs(rep.z_value) > 0.001
    assert rep.regime == "saturated-linear"


def test_leader_first_order_consistency():
    """At the solution, f1 is a dense-grid argmin against the solved f2.

    The equilibrium is a mutual best response, so with f2 pinned at its
    solved value a 10^4-point scan over f1 must land on the same spot.
    """
    grid = np.linspace(0.0, 1.0, 10_001)
    step = 1.0 / 10_000
    for policy in (BASE, BonusPolicy(alpha=2e6)):
        rep = solve_stackelberg(P, policy)
        costs = insurer_cost_reduced_at(grid, rep.fractions.f2, P, policy)
        ref = grid[int(np.argmin(costs))]
        assert abs(rep.fractions.f1 - ref) <= 2.0 * step


def test_myopic_insurer_objective_is_convex_in_f1():
    # positive f2-coefficient cases: f2*n_f*r_f - r_c + h_eps > 0
    f1 = np.linspace(0.01, 0.99, 197)
    for f2 in (0.85, 0.95, 1.0):
        assert f2 * P.n_f * P.r_f - P.r_c + P.h_eps > 0.0
        cost = insurer_cost_reduced_at(f1, f2, P, BASE)
        second = cost[:-2] - 2.0 * cost[1:-1] + cost[2:]
        assert (second >= -1e-9).all()


def test_full_and_reduced_costs_locate_the_same_equilibrium():
    """Constants cannot move an argmin - up to float cancellation.

    The full objective carries a ~1.7e7 constant, so double precision
    limits attainable argmin agreement to about sqrt(ulp/curvature),
    a few 1e-7; the two solves must agree to 1e-6 and print identically
    at reporting precision.
    """
    for policy in (BASE, BonusPolicy(alpha=3e6)):
        red = _solve_fractions(P, policy, SolveSettings())
        full = _solve_fractions(P, policy, SolveSettings(),
                                cost_at=insurer_cost_full_at)
        assert abs(red[0] - full[0]) <= 1e-6
        assert abs(red[1] - full[1]) <= 1e-6
        assert f"{red[0]:.4f} {red[1]:.4f}" == f"{full[0]:.4f} {full[1]:.4f}"


def test_settings_are_respected():
    coarse = SolveSettings(grid_points=501, refine_tol=1e-6)
    rep = solve_stackelberg(P, BASE, coarse)
    assert rep.fractions.f1 == pytest.approx(0.95274385, abs=1e-4)
    with pytest.raises(ConstraintError, match="grid_points"):
        SolveSettings(grid_points=2)
    with pytest.raises(ConstraintError, match="refine_tol"):
        SolveSettings(refine_tol=0.5)


# ---------------------------------------------------------------------------
# solve_linear_regime
# ---------------------------------------------------------------------------

def test_linear_regime_defaults():
    rep = solve_linear_regime(P)
    assert (rep.fractions.f1, rep.fractions.f2) == (0.0, 1.0)
    assert rep.bonus == 0.0


def test_linear_regime_flips_at_f2_08():
    rep = solve_linear_regime(P, f2_override=0.8)
    assert rep.fractions.f1 == 1.0
    assert rep.fractions.f2 == 0.8


def test_linear_regime_small_h_eps_gives_all_ffs():
    params = ModelParams(h_f=P.h_c + 20.0)
    assert params.h_eps == pytest.approx(20.0, abs=1e-9)
    rep = solve_linear_regime(params)
    assert (rep.fractions.f1, rep.fractions.f2) == (1.0, 1.0)


def test_linear_regime_rejects_bad_override():
    with pytest.raises(ConstraintError, match="f2_override"):
        solve_linear_regime(P, f2_override=1.2)


# ---------------------------------------------------------------------------
# play_repeated
# ---------------------------------------------------------------------------

def test_single_round_equals_one_shot_solve():
    trace = play_repeated(1, P, BASE)
    rep = solve_stackelberg(P, BASE)
    assert trace.final().fractions == rep.fractions
    assert len(trace.rounds) == 1


def test_hundred_rounds_near_one_shot_values():
    trace = play_repeated(100, P, BASE)
    last = trace.final()
    assert last.fractions.f1 == pytest.approx(0.9527, abs=2e-3)
    assert last.fractions.f2 == pytest.approx(0.9398, abs=1e-3)
    assert -last.report.bonus == pytest.approx(55_808.54, rel=5e-3)


def test_round_two_insurer_update():
    trace = play_repeated(2, P, BASE)
    assert trace.rounds[1].fractions.f1 == pytest.approx(0.9523, abs=2e-3)


def test_repeated_play_is_stable():
    f50 = play_repeated(50, P, BASE).final().fractions
    f100 = play_repeated(100, P, BASE).final().fractions
    assert abs(f100.f1 - f50.f1) < 1e-4
    assert abs(f100.f2 - f50.f2) < 1e-4


def test_trace_shape_and_round_indices():
    trace = play_repeated(5, P, BASE)
    assert [r.round_index for r in trace.rounds] == [1, 2, 3, 4, 5]
    for rec in trace.rounds:
        assert 0.0 <= rec.fractions.f1 <= 1.0
        assert 0.0 <= rec.fractions.f2 <= 1.0
    assert trace.inflation_rate == 1.0


def test_zero_rounds_rejected():
    with pytest.raises(ConstraintError, match="rounds >= 1"):
        play_repeated(0, P, BASE)


def test_inflation_compounds_revenues():
    flat = play_repeated(3, P, BASE)
    grown = play_repeated(3, P, BASE, inflation_rate=1.10)
    assert grown.inflation_rate == 1.10
    # round 1 identical (inflation starts after the first round) ...
    assert grown.rounds[0].fractions == flat.rounds[0].fractions
    # ... later rounds see different revenues, hence different play
    assert grown.rounds[2].fractions != flat.rounds[2].fractions
