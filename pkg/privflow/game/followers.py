from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import bisect, brentq

from privflow.errors import Infeasible, NonConvergence
from privflow.rng import STREAM_CONCAVITY, make_rng

from .models import DistortionProfile, FollowerSpec

logger = logging.getLogger(__name__)

EPS_MIN = 1e-12
SLOPE_STEP = 1e-6
ROOT_XTOL = 1e-12
CONCAVITY_STEP = 1e-4
CONCAVITY_SAMPLES = 100


def quality_to_budget_floor(d: float, prof: DistortionProfile) -> float:
    """Smallest budget whose expected distortion meets the threshold d."""
    if d <= 0:
        raise ValueError(f"distortion threshold must be positive, got {d}")
    at_full = prof(1.0)
    if d < at_full and not np.isclose(d, at_full, rtol=1e-12, atol=0.0):
        raise Infeasible(f"threshold {d:g} below distortion {at_full:g} at full budget")
    if d <= at_full:
        return 1.0
    if prof(EPS_MIN) <= d:
        return 0.0
    return float(bisect(lambda eps: prof(eps) - d, EPS_MIN, 1.0, xtol=ROOT_XTOL, maxiter=400))


def maximize_on_interval(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    candidates: Sequence[float] = (),
) -> tuple[float, float]:
    """Bounded 1-D maximization: root of the finite-difference slope plus endpoint and kink checks."""
    if hi - lo <= 1e-15:
        return lo, fn(lo)

    def slope(x: float) -> float:
        return fn(min(x + SLOPE_STEP, hi)) - fn(max(x - SLOPE_STEP, lo))

    points = [lo, hi]
    s_lo, s_hi = slope(lo), slope(hi)
    if s_lo > 0 and s_hi < 0:
        points.append(float(brentq(slope, lo, hi, xtol=ROOT_XTOL, maxiter=500)))
    points.extend(x for x in candidates if lo < x < hi)

    best_x, best_val = lo, fn(lo)
    for x in points[1:]:
        val = fn(x)
        if val > best_val + 1e-15:
            best_x, best_val = x, val
    return float(best_x), float(best_val)


def _own_objective(followers: Sequence[FollowerSpec], k: int, z: np.ndarray) -> Callable[[float], float]:
    follower = followers[k]
    base = np.array(z, dtype=float)

    def objective(x: float) -> float:
        base[k] = x
        return follower.payoff(base, k)

    return objective


def best_response(followers: Sequence[FollowerSpec], k: int, z: np.ndarray) -> float:
    follower = followers[k]
    lo, hi = follower.floor, follower.ceiling
    if hi < lo:
        raise Infeasible(f"follower {follower.id}: floor {lo:g} above ceiling {hi:g}")
    x, _ = maximize_on_interval(_own_objective(followers, k, z), lo, hi, follower.breakpoints)
    return x


def check_concavity(followers: Sequence[FollowerSpec], a: Sequence[bool], seed: int = 0) -> list[int]:
    """Followers whose own-coordinate second differences are positive somewhere on the active region."""
    rng = make_rng(seed, STREAM_CONCAVITY)
    active = [k for k, share in enumerate(a) if share]
    violators: list[int] = []
    for k in active:
        follower = followers[k]
        lo, hi = follower.floor + CONCAVITY_STEP, follower.ceiling - CONCAVITY_STEP
        if hi <= lo:
            continue
        for _ in range(CONCAVITY_SAMPLES):
            z = np.zeros(len(followers))
            for j in active:
                z[j] = rng.uniform(followers[j].floor, followers[j].ceiling)
            x = rng.uniform(lo, hi)
            g = _own_objective(followers, k, z)
            second = g(x + CONCAVITY_STEP) - 2.0 * g(x) + g(x - CONCAVITY_STEP)
            if second > 1e-10:
                violators.append(k)
                break
    for k in violators:
        logger.warning("follower %s utility is not concave in its own budget", followers[k].id)
    return violators


def lower_stage_equilibrium(
    followers: Sequence[FollowerSpec],
    a: Sequence[bool],
    *,
    start: Sequence[float] | None = None,
    damping: float = 0.5,
    max_iter: int = 10_000,
    tol: float = 1e-8,
    concavity_check: bool = True,
) -> np.ndarray:
    n = len(followers)
    if len(a) != n:
        raise ValueError("participation vector length differs from follower count")
    active = [k for k, share in enumerate(a) if share]
    z = np.zeros(n)
    if not active:
        return z
    if concavity_check:
        check_concavity(followers, a)

    for k in active:
        f = followers[k]
        z[k] = f.floor if start is None else float(np.clip(start[k], f.floor, f.ceiling))

    for iteration in range(max_iter):
        response = z.copy()
        for k in active:
            response[k] = best_response(followers, k, z)
        deviation = float(np.max(np.abs(response - z)))
        if deviation < tol:
            logger.debug("lower stage converged after %d iterations", iteration)
            return z
        z = z + damping * (response - z)
    raise NonConvergence(f"best-response iteration did not settle within {max_iter} steps")


def collaboration_gain(
    followers: Sequence[FollowerSpec],
    k: int,
    floor: float,
    z_minus: Sequence[float],
) -> float:
    """Best utility improvement follower k can get by sharing at any budget in [floor, ceiling]."""
    if not 0.0 <= floor <= 1.0:
        raise ValueError(f"floor must lie in [0, 1], got {floor}")
    follower = followers[k]
    objective = _own_objective(followers, k, np.asarray(z_minus, dtype=float))
    baseline = objective(0.0)
    hi = max(floor, follower.ceiling)
    _, best = maximize_on_interval(objective, floor, hi, follower.breakpoints)
    return best - baseline


def sufficient_condition_check(followers: Sequence[FollowerSpec], floors: Sequence[float]) -> int | None:
    """Id of the first follower for which sharing beats the all-zero profile, if any."""
    zeros = np.zeros(len(followers))
    for k, follower in enumerate(followers):
        if collaboration_gain(followers, k, floors[k], zeros) > 0:
            return follower.id
    return None
