from __future__ import annotations

import itertools
import logging
import math
from typing import Mapping

import numpy as np

from .models import ArterialGeometry, BandProblem, BandSolution
from .simplex import linprog_simplex

logger = logging.getLogger(__name__)

# small bonus on raw bandwidth so zero-weight directions still receive a band
TIE_BREAK = 1e-6


def _direction_weight(q_hat: Mapping[str, float], geom: ArterialGeometry, direction: str) -> float:
    ratios = [max(float(q_hat.get(m.id, 0.0)), 0.0) / m.capacity for m in geom.movements if m.direction == direction]
    return max(ratios, default=0.0)


def build_band_problem(
    geom: ArterialGeometry,
    cycle_s: float,
    greens_s: Mapping[str, Mapping[str, float]],
    q_hat: Mapping[str, float],
    alpha: float = 1.0,
) -> BandProblem:
    red, red_bar = [], []
    for name in geom.names:
        out = geom.through(name, "outbound")
        inb = geom.through(name, "inbound")
        red.append(1.0 - greens_s[name][out.phase] / cycle_s)
        red_bar.append(1.0 - greens_s[name][inb.phase] / cycle_s)
    travel, travel_bar = geom.travel_times(cycle_s)
    return BandProblem(
        red=red,
        red_bar=red_bar,
        travel=travel.tolist(),
        travel_bar=travel_bar.tolist(),
        e=[i.e for i in geom.intersections],
        e_bar=[i.e_bar for i in geom.intersections],
        delta=[i.delta for i in geom.intersections],
        w_out=_direction_weight(q_hat, geom, "outbound"),
        w_in=_direction_weight(q_hat, geom, "inbound"),
        alpha=alpha,
    )


def loop_constants(problem: BandProblem) -> np.ndarray:
    """K_i such that s_i - s_{i+1} = K_i + M_i with s_i = zeta_i + zeta_bar_i."""
    r, rb = np.asarray(problem.red), np.asarray(problem.red_bar)
    e, eb, delta = np.asarray(problem.e), np.asarray(problem.e_bar), np.asarray(problem.delta)
    t, tb = np.asarray(problem.travel), np.asarray(problem.travel_bar)
    return (
        -0.5 * (r[:-1] + rb[:-1])
        + 0.5 * (r[1:] + rb[1:])
        + (eb[:-1] + e[1:])
        - (t + tb)
        - delta[:-1]
        + delta[1:]
    )


def loop_integer_ranges(problem: BandProblem) -> list[range]:
    """Admissible M_i: the nominal +-(ceil(t + t_bar + 2) + 2) window cut to values the zeta bounds allow."""
    k = loop_constants(problem)
    slack = 2.0 - np.asarray(problem.red) - np.asarray(problem.red_bar)
    ranges = []
    for i in range(problem.size - 1):
        span = math.ceil(problem.travel[i] + problem.travel_bar[i] + 2.0) + 2
        lo = max(-span, math.ceil(-slack[i + 1] - k[i] - 1e-9))
        hi = min(span, math.floor(slack[i] - k[i] + 1e-9))
        ranges.append(range(lo, hi + 1))
    return ranges


def _solve_fixed(problem: BandProblem, m: tuple[int, ...]):
    n = problem.size
    n_var = 2 + 2 * n  # b, b_bar, zeta_0..n-1, zeta_bar_0..n-1
    c = np.zeros(n_var)
    c[0] = problem.w_out**problem.alpha + TIE_BREAK
    c[1] = problem.w_in**problem.alpha + TIE_BREAK

    a_ub = np.zeros((2 * n, n_var))
    b_ub = np.zeros(2 * n)
    for i in range(n):
        a_ub[i, 0] = 1.0
        a_ub[i, 2 + i] = 1.0
        b_ub[i] = 1.0 - problem.red[i]
        a_ub[n + i, 1] = 1.0
        a_ub[n + i, 2 + n + i] = 1.0
        b_ub[n + i] = 1.0 - problem.red_bar[i]

    k = loop_constants(problem)
    a_eq = np.zeros((n - 1, n_var))
    b_eq = np.zeros(n - 1)
    for i in range(n - 1):
        a_eq[i, 2 + i] = a_eq[i, 2 + n + i] = 1.0
        a_eq[i, 3 + i] = a_eq[i, 3 + n + i] = -1.0
        b_eq[i] = k[i] + m[i]
    return linprog_simplex(c, a_ub, b_ub, a_eq if n > 1 else None, b_eq if n > 1 else None)


def band_objective(problem: BandProblem, b: float, b_bar: float) -> float:
    return problem.w_out**problem.alpha * b + problem.w_in**problem.alpha * b_bar


def maxband_solve(problem: BandProblem) -> BandSolution:
    """Enumerate loop integers and solve each fixed-M linear program; keep the best."""
    n = problem.size
    best = None
    best_value = -np.inf
    best_m: tuple[int, ...] = ()
    for m in itertools.product(*loop_integer_ranges(problem)):
        result = _solve_fixed(problem, m)
        if not result.success:
            continue
        value = result.objective
        if value > best_value + 1e-12:
            best, best_value, best_m = result, value, m
    if best is None:
        logger.warning("MAXBAND infeasible for every loop-integer combination; using a zero band")
        return BandSolution(b=0.0, b_bar=0.0, zeta=[0.0] * n, zeta_bar=[0.0] * n, m=[0] * (n - 1), feasible=False)
    x = best.x
    b, b_bar = float(x[0]), float(x[1])
    solution = BandSolution(
        b=b,
        b_bar=b_bar,
        zeta=[float(v) for v in x[2 : 2 + n]],
        zeta_bar=[float(v) for v in x[2 + n :]],
        m=list(best_m),
        objective=band_objective(problem, b, b_bar),
    )
    logger.debug("MAXBAND b=%.4f b_bar=%.4f M=%s", b, b_bar, best_m)
    return solution


def offsets_from_band(sol: BandSolution, problem: BandProblem, cycle_s: float) -> list[float]:
    """Offsets in seconds between consecutive intersections."""
    offsets = []
    for i in range(problem.size - 1):
        cycles = (0.5 * problem.red[i] + sol.zeta[i] + problem.travel[i]) - (0.5 * problem.red[i + 1] + sol.zeta[i + 1])
        cycles %= 1.0
        if cycles >= 1.0 - 1e-12:
            cycles = 0.0
        offsets.append(cycles * cycle_s)
    return offsets

