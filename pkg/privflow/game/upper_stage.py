from __future__ import annotations

import itertools
import logging
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from privflow.errors import NotFound

from .followers import lower_stage_equilibrium
from .models import FollowerSpec, MixedProfile, Profile, ValueTable

logger = logging.getLogger(__name__)

MAX_PLAYERS = 16
REGRET_TOL = 1e-6
DIFFERENCE_TOL = 1e-9
SCAN_POINTS = 2001


def upper_stage_value_table(
    followers: Sequence[FollowerSpec],
    floors: Sequence[float] | None = None,
    *,
    concavity_check: bool = True,
) -> ValueTable:
    n = len(followers)
    if n > MAX_PLAYERS:
        raise ValueError(f"value table enumeration supports at most {MAX_PLAYERS} followers, got {n}")
    if floors is not None:
        followers = [f.with_floor(phi) for f, phi in zip(followers, floors)]

    table = ValueTable()
    for a in itertools.product((0, 1), repeat=n):
        z = lower_stage_equilibrium(followers, [bool(x) for x in a], concavity_check=concavity_check)
        table.z_star[a] = z
        table.values[a] = np.array([f.payoff(z, k) for k, f in enumerate(followers)])
    return table


def _flip(a: Profile, k: int) -> Profile:
    return a[:k] + (1 - a[k],) + a[k + 1 :]


def pure_ne(table: ValueTable) -> list[Profile]:
    found = []
    for a in table.profiles():
        if all(table.payoff(a, k) >= table.payoff(_flip(a, k), k) for k in range(len(a))):
            found.append(a)
    return found


def _prob(a: Profile, probs: Sequence[float], skip: int | None = None) -> float:
    weight = 1.0
    for j, (share, p) in enumerate(zip(a, probs)):
        if j == skip:
            continue
        weight *= p if share else 1.0 - p
    return weight


def _action_values(table: ValueTable, probs: Sequence[float], k: int) -> tuple[float, float]:
    """Expected payoff of follower k for sharing and for abstaining against the others' mixture."""
    share = abstain = 0.0
    for a in table.profiles():
        w = _prob(a, probs, skip=k)
        if a[k]:
            share += w * table.payoff(a, k)
        else:
            abstain += w * table.payoff(a, k)
    return share, abstain


def _gain(table: ValueTable, probs: Sequence[float], k: int) -> float:
    share, abstain = _action_values(table, probs, k)
    return share - abstain


def regret(table: ValueTable, probs: Sequence[float]) -> float:
    worst = 0.0
    for k in range(table.n_players):
        share, abstain = _action_values(table, probs, k)
        expected = probs[k] * share + (1.0 - probs[k]) * abstain
        worst = max(worst, max(share, abstain) - expected)
    return worst


def _indifference(table: ValueTable, probs: list[float], k: int, j: int) -> float | None:
    """Mixing probability of j that leaves k indifferent (others held fixed); gain is affine in it."""
    at0 = _gain(table, probs[:j] + [0.0] + probs[j + 1 :], k)
    at1 = _gain(table, probs[:j] + [1.0] + probs[j + 1 :], k)
    slope = at1 - at0
    if abs(slope) < 1e-14:
        return None
    p = -at0 / slope
    if -1e-12 <= p <= 1.0 + 1e-12:
        return float(min(max(p, 0.0), 1.0))
    return None


def _candidates_one_mixer(table: ValueTable, pure: Profile, k: int) -> list[list[float]]:
    """k's gain ignores p_k, so k must already be indifferent; the others' constraints bound p_k."""
    probs = [float(x) for x in pure]
    if abs(_gain(table, probs, k)) >= 1e-12:
        return []
    lo, hi = 0.0, 1.0
    for j in range(len(probs)):
        if j == k:
            continue
        at0 = _gain(table, probs[:k] + [0.0] + probs[k + 1 :], j)
        at1 = _gain(table, probs[:k] + [1.0] + probs[k + 1 :], j)
        sign = 1.0 if pure[j] else -1.0
        # j keeps its pure action while sign * gain_j >= 0, affine in p_k
        a, b = sign * at0, sign * (at1 - at0)
        if abs(b) < 1e-14:
            if a < -1e-12:
                return []
            continue
        root = -a / b
        if b > 0:
            lo = max(lo, root)
        else:
            hi = min(hi, root)
    if lo > hi + 1e-12:
        return []
    mid = float(min(max(0.5 * (lo + hi), 0.0), 1.0))
    return [probs[:k] + [mid] + probs[k + 1 :]]


def _candidates_two_mixers(table: ValueTable, pure: Profile, k: int, j: int) -> list[list[float]]:
    probs = [float(x) for x in pure]
    p_j = _indifference(table, probs, k, j)
    p_k = _indifference(table, probs, j, k)
    if p_j is None or p_k is None:
        return []
    probs[j], probs[k] = p_j, p_k
    return [probs]


def _candidates_three_mixers(table: ValueTable) -> list[list[float]]:
    """Reduce the three indifference conditions to one equation in p3 and scan it for roots."""

    def completed(p3: float) -> list[float] | None:
        p2 = _indifference(table, [0.0, 0.0, p3], 0, 1)
        p1 = _indifference(table, [0.0, 0.0, p3], 1, 0)
        if p1 is None or p2 is None:
            return None
        return [p1, p2, p3]

    def residual(p3: float) -> float:
        probs = completed(p3)
        if probs is None:
            return float("nan")
        return _gain(table, probs, 2)

    grid = np.linspace(0.0, 1.0, SCAN_POINTS)
    values = np.array([residual(float(p)) for p in grid])
    found: list[list[float]] = []
    for i in range(len(grid) - 1):
        lo, hi = values[i], values[i + 1]
        if not (np.isfinite(lo) and np.isfinite(hi)):
            continue
        if lo == 0.0:
            root = float(grid[i])
        elif lo * hi < 0:
            root = float(brentq(residual, grid[i], grid[i + 1], xtol=1e-14, maxiter=200))
        else:
            continue
        probs = completed(root)
        if probs is not None:
            found.append(probs)
    return found


def mixed_ne(table: ValueTable) -> MixedProfile:
    n = table.n_players
    if n > 3:
        raise ValueError(f"mixed equilibrium search supports at most 3 followers, got {n}")
    if n == 0:
        return MixedProfile(probs=[], regret=0.0)

    pure = pure_ne(table)
    if pure:
        return MixedProfile(probs=[float(x) for x in pure[0]], regret=0.0)

    candidates: list[list[float]] = []
    players = range(n)
    for mixers in itertools.chain.from_iterable(itertools.combinations(players, r) for r in (1, 2, 3)):
        if len(mixers) == 3:
            candidates.extend(_candidates_three_mixers(table))
            continue
        fixed = [k for k in players if k not in mixers]
        for assignment in itertools.product((0, 1), repeat=len(fixed)):
            base = [0] * n
            for k, x in zip(fixed, assignment):
                base[k] = x
            start = tuple(base)
            if len(mixers) == 1:
                candidates.extend(_candidates_one_mixer(table, start, mixers[0]))
            else:
                candidates.extend(_candidates_two_mixers(table, start, mixers[0], mixers[1]))

    best: MixedProfile | None = None
    for probs in candidates:
        r = regret(table, probs)
        if r < REGRET_TOL and (best is None or r < best.regret):
            best = MixedProfile(probs=probs, regret=r)
    if best is None:
        raise NotFound("no mixed profile with regret below tolerance")
    logger.debug("mixed equilibrium %s with regret %.3g", best.probs, best.regret)
    return best


def decreasing_differences_check(table: ValueTable) -> tuple[bool, float]:
    """Whether V_k has decreasing differences in (a_k, a_l) for every pair; returns the worst excess."""
    n = table.n_players
    worst = float("-inf")
    for k, l in itertools.permutations(range(n), 2):
        others = [j for j in range(n) if j not in (k, l)]
        for context in itertools.product((0, 1), repeat=len(others)):
            a = [0] * n
            for j, x in zip(others, context):
                a[j] = x

            def v(ak: int, al: int) -> float:
                a[k], a[l] = ak, al
                return table.payoff(tuple(a), k)

            excess = (v(1, 1) - v(1, 0)) - (v(0, 1) - v(0, 0))
            worst = max(worst, excess)
    if worst == float("-inf"):
        return True, 0.0
    return worst <= DIFFERENCE_TOL, float(worst)
