from __future__ import annotations

import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from conftest import corridor, corridor_flows
from privflow.timing.maxband import (
    TIE_BREAK,
    band_objective,
    build_band_problem,
    loop_constants,
    loop_integer_ranges,
    maxband_solve,
    offsets_from_band,
)
from privflow.timing.models import BandProblem, BandSolution
from privflow.timing.simplex import linprog_simplex


def _reference_band(problem: BandProblem, window: int = 8) -> float:
    """Best objective over a wide box of loop integers, each fixed-M program solved by HiGHS."""
    n = problem.size
    n_var = 2 + 2 * n
    c = np.zeros(n_var)
    c[0] = problem.w_out**problem.alpha + TIE_BREAK
    c[1] = problem.w_in**problem.alpha + TIE_BREAK
    a_ub = np.zeros((2 * n, n_var))
    b_ub = np.zeros(2 * n)
    for i in range(n):
        a_ub[i, [0, 2 + i]] = 1.0
        b_ub[i] = 1.0 - problem.red[i]
        a_ub[n + i, [1, 2 + n + i]] = 1.0
        b_ub[n + i] = 1.0 - problem.red_bar[i]
    k = loop_constants(problem)
    best = -np.inf
    for m in itertools.product(range(-window, window + 1), repeat=n - 1):
        a_eq = np.zeros((n - 1, n_var))
        for i in range(n - 1):
            a_eq[i, [2 + i, 2 + n + i]] = 1.0
            a_eq[i, [3 + i, 3 + n + i]] = -1.0
        res = linprog(-c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=k + np.array(m), bounds=(0, None), method="highs")
        if res.status == 0:
            best = max(best, band_objective(problem, res.x[0], res.x[1]))
    return best


def test_single_intersection_band_is_its_green() -> None:
    sol = maxband_solve(BandProblem(red=[0.4], red_bar=[0.3]))
    assert sol.feasible
    assert sol.b == pytest.approx(0.6)
    assert sol.b_bar == pytest.approx(0.7)
    assert sol.m == []


def test_identical_intersections_share_a_full_band() -> None:
    problem = BandProblem(red=[0.5, 0.5], red_bar=[0.5, 0.5], travel=[1.0], travel_bar=[1.0])
    sol = maxband_solve(problem)
    assert sol.b == pytest.approx(0.5)
    assert sol.b_bar == pytest.approx(0.5)
    assert offsets_from_band(sol, problem, 80.0) == [pytest.approx(0.0)]


def test_band_never_exceeds_any_green() -> None:
    problem = BandProblem(red=[0.4, 0.55, 0.45], red_bar=[0.5, 0.35, 0.6], travel=[0.7, 1.3], travel_bar=[0.6, 1.1])
    sol = maxband_solve(problem)
    assert sol.b <= 1.0 - max(problem.red) + 1e-9
    assert sol.b_bar <= 1.0 - max(problem.red_bar) + 1e-9
    for i in range(problem.size):
        assert sol.b + sol.zeta[i] <= 1.0 - problem.red[i] + 1e-9
        assert sol.b_bar + sol.zeta_bar[i] <= 1.0 - problem.red_bar[i] + 1e-9


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_matches_exhaustive_reference(seed: int) -> None:
    rng = np.random.default_rng(seed)
    problem = BandProblem(
        red=rng.uniform(0.3, 0.6, 3).tolist(),
        red_bar=rng.uniform(0.3, 0.6, 3).tolist(),
        travel=rng.uniform(0.2, 1.5, 2).tolist(),
        travel_bar=rng.uniform(0.2, 1.5, 2).tolist(),
        w_out=float(rng.uniform(0.2, 1.0)),
        w_in=float(rng.uniform(0.2, 1.0)),
    )
    sol = maxband_solve(problem)
    assert sol.feasible
    assert sol.objective == pytest.approx(_reference_band(problem), abs=1e-5)


def test_zero_weight_direction_still_gets_a_band() -> None:
    problem = BandProblem(red=[0.5, 0.5], red_bar=[0.5, 0.5], travel=[1.0], travel_bar=[1.0], w_out=1.0, w_in=0.0)
    sol = maxband_solve(problem)
    assert sol.b == pytest.approx(0.5)
    assert sol.b_bar > 0.0


def test_no_admissible_loop_integer_gives_zero_band() -> None:
    problem = BandProblem(red=[0.9, 0.9], red_bar=[0.9, 0.9], travel=[0.25], travel_bar=[0.25])
    assert [list(r) for r in loop_integer_ranges(problem)] == [[]]
    sol = maxband_solve(problem)
    assert not sol.feasible
    assert sol.b == 0.0 and sol.b_bar == 0.0


def test_offset_from_band_position() -> None:
    problem = BandProblem(red=[0.5, 0.5], red_bar=[0.5, 0.5], travel=[0.75], travel_bar=[0.75])
    sol = BandSolution(b=0.5, b_bar=0.5, zeta=[0.0, 0.0], zeta_bar=[0.0, 0.0], m=[1])
    assert offsets_from_band(sol, problem, 80.0) == [pytest.approx(60.0)]


def test_problem_from_geometry_uses_reds_and_travel_times() -> None:
    geom = corridor(2, segment_m=600.0)
    greens = {"I1": {"main": 30.0, "cross": 18.0}, "I2": {"main": 24.0, "cross": 24.0}}
    problem = build_band_problem(geom, 60.0, greens, corridor_flows(geom, 0.3, 0.1))
    assert problem.red == [pytest.approx(0.5), pytest.approx(0.6)]
    assert problem.travel == [pytest.approx(600.0 / 12.0 / 60.0)]
    assert problem.w_out == pytest.approx(0.3)


def test_simplex_textbook_program() -> None:
    result = linprog_simplex(
        np.array([3.0, 2.0]),
        a_ub=np.array([[1.0, 1.0], [1.0, 3.0], [1.0, 0.0]]),
        b_ub=np.array([4.0, 6.0, 3.0]),
    )
    assert result.success
    assert result.x == pytest.approx([3.0, 1.0])
    assert result.objective == pytest.approx(11.0)


def test_simplex_reports_infeasible_and_unbounded() -> None:
    infeasible = linprog_simplex(np.array([1.0]), a_ub=np.array([[1.0], [-1.0]]), b_ub=np.array([1.0, -2.0]))
    assert infeasible.status == "infeasible"
    unbounded = linprog_simplex(np.array([1.0, 1.0]), a_ub=np.array([[1.0, -1.0]]), b_ub=np.array([1.0]))
    assert unbounded.status == "unbounded"


@pytest.mark.parametrize("seed", [4, 5, 6])
def test_simplex_agrees_with_highs(seed: int) -> None:
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.1, 1.0, 4)
    a_ub = rng.uniform(0.1, 1.0, (5, 4))
    b_ub = rng.uniform(1.0, 3.0, 5)
    a_eq = np.array([[1.0, -1.0, 0.0, 0.0]])
    b_eq = np.array([0.2])
    ours = linprog_simplex(c, a_ub, b_ub, a_eq, b_eq)
    ref = linprog(-c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    assert ours.success and ref.status == 0
    assert ours.objective == pytest.approx(-ref.fun, abs=1e-8)
