from __future__ import annotations

import logging
from dataclasses import replace
from typing import Callable, Literal, Sequence

import numpy as np

from privflow.errors import Infeasible, NonConvergence

from .followers import collaboration_gain, quality_to_budget_floor
from .models import (
    ActionProfile,
    DistortionProfile,
    FollowerSpec,
    LeaderEvaluation,
    MixedProfile,
    SneResult,
)
from .upper_stage import mixed_ne, pure_ne, upper_stage_value_table

logger = logging.getLogger(__name__)

LeaderValue = Callable[[Sequence[bool], np.ndarray], float]
InfeasiblePolicy = Literal["skip", "exclude"]

CEILING_TOL = 1e-9


def _embed(follower: FollowerSpec, eligible: Sequence[int], n: int) -> FollowerSpec:
    """Restrict a follower to the eligible sub-game; excluded followers stay at z = 0."""
    full_utility = follower.utility

    def utility(z_sub: np.ndarray) -> float:
        z = np.zeros(n)
        z[list(eligible)] = z_sub
        return full_utility(z)

    return replace(follower, utility=utility)


def _expand(values: Sequence[float], eligible: Sequence[int], n: int) -> np.ndarray:
    full = np.zeros(n)
    full[list(eligible)] = values
    return full


def _floors_for(
    d: Sequence[float],
    followers: Sequence[FollowerSpec],
    profiles: Sequence[DistortionProfile],
    policy: InfeasiblePolicy,
) -> list[float | None] | None:
    floors: list[float | None] = []
    for k, (d_k, prof) in enumerate(zip(d, profiles)):
        try:
            phi = quality_to_budget_floor(d_k, prof)
        except Infeasible:
            if policy == "skip":
                return None
            phi = None
        if phi is not None:
            ceiling = followers[k].ceiling
            phi = None if phi > ceiling + CEILING_TOL else min(phi, ceiling)
        floors.append(phi)
    return floors


def evaluate_leader_choice(
    d: Sequence[float],
    followers: Sequence[FollowerSpec],
    profiles: Sequence[DistortionProfile],
    leader_value: LeaderValue,
    *,
    infeasible: InfeasiblePolicy = "skip",
    concavity_check: bool = True,
) -> LeaderEvaluation:
    n = len(followers)
    d = [float(x) for x in d]
    floors = _floors_for(d, followers, profiles, infeasible)
    if floors is None:
        return LeaderEvaluation(d=d, status="infeasible")

    eligible = [k for k, phi in enumerate(floors) if phi is not None]
    if not eligible:
        zeros = np.zeros(n)
        return LeaderEvaluation(
            d=d,
            floors=floors,
            kind="pure",
            profile=ActionProfile(a=[False] * n, z=[0.0] * n),
            leader_value=float(leader_value([False] * n, zeros)),
            gains=[None] * n,
        )

    sub = [_embed(followers[k], eligible, n).with_floor(floors[k]) for k in eligible]
    zeros_sub = np.zeros(len(sub))
    gains: list[float | None] = [None] * n
    for i, k in enumerate(eligible):
        gains[k] = collaboration_gain(sub, i, floors[k], zeros_sub)

    try:
        table = upper_stage_value_table(sub, concavity_check=concavity_check)
    except NonConvergence as exc:
        logger.warning("leader choice %s skipped: %s", d, exc)
        return LeaderEvaluation(d=d, floors=floors, status="nonconvergent", gains=gains)

    def full_value(a_sub: Sequence[int]) -> tuple[list[bool], np.ndarray, float]:
        a_full = [False] * n
        for i, k in enumerate(eligible):
            a_full[k] = bool(a_sub[i])
        z_full = _expand(table.z_star[tuple(a_sub)], eligible, n)
        return a_full, z_full, float(leader_value(a_full, z_full))

    equilibria = pure_ne(table)
    if equilibria:
        scored = [(full_value(a), a) for a in equilibria]
        (a_full, z_full, value), _ = max(scored, key=lambda item: (item[0][2], [-x for x in item[1]]))
        return LeaderEvaluation(
            d=d,
            floors=floors,
            kind="pure",
            profile=ActionProfile(a=a_full, z=[float(x) for x in z_full]),
            leader_value=value,
            gains=gains,
        )

    mixed = mixed_ne(table)
    expected = 0.0
    for a_sub in table.profiles():
        weight = 1.0
        for share, p in zip(a_sub, mixed.probs):
            weight *= p if share else 1.0 - p
        if weight > 0:
            expected += weight * full_value(a_sub)[2]
    probs = list(_expand(mixed.probs, eligible, n))
    return LeaderEvaluation(
        d=d,
        floors=floors,
        kind="mixed",
        mixed=MixedProfile(probs=[float(p) for p in probs], regret=mixed.regret),
        leader_value=expected,
        gains=gains,
    )


def solve_sne(
    leader_grid: Sequence[Sequence[float]],
    followers: Sequence[FollowerSpec],
    prof: DistortionProfile | Sequence[DistortionProfile],
    leader_value: LeaderValue,
    *,
    infeasible: InfeasiblePolicy = "skip",
    concavity_check: bool = True,
) -> SneResult:
    if not leader_grid:
        raise ValueError("leader grid is empty")
    profiles = [prof] * len(followers) if isinstance(prof, DistortionProfile) else list(prof)
    if len(profiles) != len(followers):
        raise ValueError("one distortion profile per follower is required")

    evaluations = [
        evaluate_leader_choice(
            d,
            followers,
            profiles,
            leader_value,
            infeasible=infeasible,
            concavity_check=concavity_check,
        )
        for d in leader_grid
    ]
    solved = [ev for ev in evaluations if ev.status == "solved"]
    if not solved:
        raise Infeasible("no leader threshold admits a follower equilibrium")

    best = solved[0]
    for ev in solved[1:]:
        if ev.leader_value is not None and best.leader_value is not None and ev.leader_value > best.leader_value:
            best = ev
    logger.info("leader threshold %s chosen with value %.6g", best.d, best.leader_value)
    return SneResult(
        leader_choice=best.d,
        floors=best.floors,
        follower_profile=best.profile,
        mixed_profile=best.mixed,
        leader_value=float(best.leader_value),
        evaluations=evaluations,
    )
