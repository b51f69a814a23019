from __future__ import annotations

import logging
import math
from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.interpolate import RegularGridInterpolator

from privflow.errors import DegenerateStats
from privflow.game.models import DistortionProfile, FollowerSpec, LeaderEvaluation, SneResult
from privflow.game.sne import solve_sne
from privflow.privacy.mechanism import noise_scales, query_stats, slope_distribution
from privflow.privacy.models import PrivacyBudget

from .pipeline import PipelineContext, collect_observations
from .scenario import Scenario
from .surface import UtilitySurface, utility_surface

logger = logging.getLogger(__name__)

Classification = Literal["no-share", "partial-share", "full-share", "unsolved"]

REFERENCE_EPS = 0.5
ABS_ERROR_FACTOR = math.sqrt(2.0 / math.pi)
SHARE_TOL = 1e-9


class RegionRow(BaseModel):
    model_config = ConfigDict(extra="forbid")

    d: list[float]
    floors: list[float | None]
    classification: Classification
    kind: str
    z: list[float] | None = None
    probs: list[float] | None = None
    leader_value: float | None = None
    gains: list[float | None] = Field(default_factory=list)


class GameResult(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sne: SneResult
    regions: list[RegionRow]
    distortion: list[str]


def distortion_scale(ctx: PipelineContext, mp_index: int, observations) -> float | None:
    """Expected absolute slope error at eps = 1 for one MP, averaged over its movements."""
    scn = ctx.scenario
    errors = []
    for movement_id in scn.covered(scn.mps[mp_index]):
        intercept = scn.movement(movement_id).case == "case2"
        noise = noise_scales(
            ctx.weights,
            PrivacyBudget(eps=REFERENCE_EPS, delta=scn.dp.delta),
            intercept=intercept,
        )
        stats = query_stats(observations[(mp_index, movement_id)], ctx.weights, intercept=intercept)
        try:
            spread = slope_distribution(stats, stats.lam_t, noise)
        except DegenerateStats:
            continue
        errors.append(ABS_ERROR_FACTOR * math.sqrt(spread.variance) * REFERENCE_EPS)
    if not errors:
        return None
    return math.fsum(errors) / len(errors)


def distortion_profiles(scn: Scenario | PipelineContext) -> list[DistortionProfile]:
    """Phi_k(eps) = E|slope error| of MP k's releases, which scales as 1/eps."""
    ctx = scn if isinstance(scn, PipelineContext) else PipelineContext.from_scenario(scn)
    observations = collect_observations(ctx, ctx.scenario.mc.seed)
    profiles = []
    for k, mp in enumerate(ctx.scenario.mps):
        scale = distortion_scale(ctx, k, observations)
        if scale is None or scale <= 0:
            logger.warning("MP %s has no usable reference data; distortion falls back to 1/eps", mp.id)
            scale = 1.0
        profiles.append(
            DistortionProfile(
                phi_fn=lambda eps, s=scale: s / eps,
                description=f"MP {mp.id}: sqrt(2/pi) * sd(slope) = {scale:.6g} / eps m/s",
            )
        )
    return profiles


def surface_interpolator(surface: UtilitySurface):
    """Linear interpolant of the MA utility; budgets above the grid are clipped to its edge."""
    axes = [np.asarray(axis, dtype=float) for axis in surface.axes]
    interp = RegularGridInterpolator(axes, surface.grid("u_ma"), method="linear")
    upper = np.array([axis[-1] for axis in axes])

    def u_ma(z: np.ndarray) -> float:
        point = np.clip(np.asarray(z, dtype=float), 0.0, upper)
        return float(interp(point[None, :])[0])

    return u_ma


def surface_followers(scn: Scenario, surface: UtilitySurface, u_ma) -> list[FollowerSpec]:
    followers = []
    for k, mp in enumerate(scn.mps):
        axis = surface.axes[k]
        followers.append(
            FollowerSpec(
                id=mp.id,
                utility=lambda z, kappa=mp.kappa: kappa * u_ma(z),
                beta=mp.beta,
                ceiling=float(axis[-1]),
                breakpoints=tuple(float(x) for x in axis),
            )
        )
    return followers


def leader_grid(scn: Scenario, profiles: Sequence[DistortionProfile]) -> list[list[float]]:
    if scn.game.leader_grid is not None:
        return [list(row) for row in scn.game.leader_grid]
    return [[profiles[k](f) for k, f in enumerate(row)] for row in scn.game.leader_floor_grid or []]


def classify(ev: LeaderEvaluation) -> Classification:
    if ev.status != "solved":
        return "unsolved"
    if ev.profile is not None:
        shares = [bool(x) for x in ev.profile.a]
    elif ev.mixed is not None:
        if all(p <= SHARE_TOL for p in ev.mixed.probs):
            return "no-share"
        if all(p >= 1.0 - SHARE_TOL for p in ev.mixed.probs):
            return "full-share"
        return "partial-share"
    else:
        return "unsolved"
    if not any(shares):
        return "no-share"
    return "full-share" if all(shares) else "partial-share"


def region_row(ev: LeaderEvaluation) -> RegionRow:
    return RegionRow(
        d=ev.d,
        floors=ev.floors,
        classification=classify(ev),
        kind=ev.kind,
        z=ev.profile.z if ev.profile is not None else None,
        probs=ev.mixed.probs if ev.mixed is not None else None,
        leader_value=ev.leader_value,
        gains=ev.gains,
    )


def run_game(
    scn: Scenario,
    surface: UtilitySurface | None = None,
    *,
    threads: int | None = None,
) -> GameResult:
    surface = surface or utility_surface(scn, threads=threads)
    u_ma = surface_interpolator(surface)
    profiles = distortion_profiles(scn)
    followers = surface_followers(scn, surface, u_ma)
    sne = solve_sne(
        leader_grid(scn, profiles),
        followers,
        profiles,
        lambda a, z: u_ma(z),
        infeasible="exclude",
        concavity_check=scn.game.concavity_check,
    )
    regions = [region_row(ev) for ev in sne.evaluations]
    counts = {c: sum(r.classification == c for r in regions) for c in ("no-share", "partial-share", "full-share")}
    logger.info("region counts %s", counts)
    return GameResult(sne=sne, regions=regions, distortion=[p.description for p in profiles])
