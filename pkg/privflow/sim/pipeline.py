"""One Monte Carlo realization of the sharing pipeline: observe, perturb, estimate, time, evaluate."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from pydantic import BaseModel, ConfigDict, Field

from privflow.privacy.mechanism import release_foq
from privflow.privacy.models import FoQDataset, PrivacyBudget, SensitivityWeights, SharedRelease
from privflow.rng import STREAM_ARRIVALS, STREAM_PERTURB, STREAM_TRUTH, make_rng
from privflow.timing.delay import evaluate_delay
from privflow.timing.models import ArterialGeometry, BandSolution, SignalPlan
from privflow.timing.policy import signal_policy
from privflow.traffic.demand import estimate_demands, sample_true_demand
from privflow.traffic.foq import simulate_foq
from privflow.traffic.models import DemandEstimate, MovementConfig, ObservedMovement

from .scenario import Scenario

logger = logging.getLogger(__name__)

ObservationKey = tuple[int, str]


class PipelineOutcome(BaseModel):
    model_config = ConfigDict(extra="forbid")

    delay_s: float
    baseline_s: float
    flags: list[str] = Field(default_factory=list)

    @property
    def improvement_s(self) -> float:
        return self.baseline_s - self.delay_s


@dataclass(frozen=True)
class PipelineContext:
    """Scenario-derived quantities shared by every realization."""

    scenario: Scenario
    geometry: ArterialGeometry
    weights: SensitivityWeights
    observed: list[ObservedMovement]
    outdated_plan: SignalPlan
    outdated_band: BandSolution
    q_true: dict[str, float]

    @classmethod
    def from_scenario(cls, scn: Scenario) -> PipelineContext:
        geom = scn.geometry()
        given = scn.outdated_plan()
        if given is None:
            derived = signal_policy(scn.prior_flows(), geom, scn.timing_settings())
            plan, band = derived.plan, derived.band
        else:
            plan, band = given
        return cls(
            scenario=scn,
            geometry=geom,
            weights=scn.sensitivity_weights(),
            observed=scn.observed_movements(),
            outdated_plan=plan,
            outdated_band=band,
            q_true=scn.true_flows(),
        )

    def red_s(self, movement_id: str) -> float:
        """Red under the plan in force while data are collected."""
        spec = self.scenario.movement(movement_id)
        return self.outdated_plan.cycle_s - self.outdated_plan.greens_s[spec.intersection][spec.phase]


def _context(scn: Scenario | PipelineContext) -> PipelineContext:
    return scn if isinstance(scn, PipelineContext) else PipelineContext.from_scenario(scn)


def link_length_m(scn: Scenario, movement_id: str) -> float | None:
    """Length of the link a through movement queues on; None when unknown."""
    spec = scn.movement(movement_id)
    net = scn.network
    names = [i.name for i in net.intersections]
    i = names.index(spec.intersection)
    if spec.direction == "outbound":
        if i > 0:
            return net.segments_m[i - 1]
        return net.approach_links_m[0] if net.approach_links_m else None
    if spec.direction == "inbound":
        if i < len(names) - 1:
            return net.segments_m[i]
        return net.approach_links_m[-1] if net.approach_links_m else None
    return None


def collect_observations(scn: Scenario | PipelineContext, sample_seed: int) -> dict[ObservationKey, FoQDataset]:
    """Every MP's FoQ data for the movements it covers, clipped to the public bounds."""
    ctx = _context(scn)
    s = ctx.scenario
    order = {m: j for j, m in enumerate(s.movement_ids)}
    out: dict[ObservationKey, FoQDataset] = {}
    for k, mp in enumerate(s.mps):
        for movement_id in s.covered(mp):
            spec = s.movement(movement_id)
            cfg = MovementConfig(
                q=ctx.q_true[movement_id],
                red=ctx.red_s(movement_id),
                cycles=s.demand.cycles,
                penetration=mp.penetration,
                case=spec.case,
                upstream_discharge_s=spec.upstream_discharge_s,
                jitter=s.demand.jitter,
                position_noise_m=s.demand.position_noise_m,
                link_length_m=link_length_m(s, movement_id),
            )
            ds = simulate_foq(
                s.movement_fd(movement_id),
                cfg,
                make_rng(sample_seed, STREAM_ARRIVALS, k, order[movement_id]),
                movement_id=movement_id,
                owner_id=mp.id,
            )
            inside = (ds.t <= ctx.weights.t_max) & (ds.h >= -ctx.weights.h_max)
            out[(k, movement_id)] = ds.select(inside)
    return out


def release_window(ctx: PipelineContext, movement_id: str) -> tuple[float, float] | None:
    """Time span an owner queries and the MA re-samples; case 2 keeps only the second queue segment."""
    spec = ctx.scenario.movement(movement_id)
    red = ctx.red_s(movement_id)
    if spec.case != "case2":
        return 0.0, red
    if red <= spec.upstream_discharge_s:
        return None
    return spec.upstream_discharge_s, red


def share(
    ctx: PipelineContext,
    observations: Mapping[ObservationKey, FoQDataset],
    a: Sequence[bool],
    eps: Sequence[float],
    seed: int,
) -> list[SharedRelease]:
    order = {m: j for j, m in enumerate(ctx.scenario.movement_ids)}
    releases = []
    for (k, movement_id), ds in sorted(observations.items(), key=lambda item: (item[0][0], order[item[0][1]])):
        if not a[k]:
            continue
        window = release_window(ctx, movement_id)
        if window is None:
            logger.debug("movement %s: red ends before the upstream discharge, nothing to release", movement_id)
            continue
        case2 = ctx.scenario.movement(movement_id).case == "case2"
        if case2:
            ds = ds.select(ds.t > window[0])
        releases.append(
            release_foq(
                ds,
                ctx.weights,
                PrivacyBudget(eps=eps[k], delta=ctx.scenario.dp.delta),
                make_rng(seed, STREAM_PERTURB, k, order[movement_id]),
                window,
                intercept=case2,
            )
        )
    return releases


def _truth_draws(ctx: PipelineContext, estimate: DemandEstimate, seed: int) -> list[dict[str, float]]:
    mc = ctx.scenario.mc
    if mc.truth == "scenario":
        return [ctx.q_true]
    return sample_true_demand(estimate, mc.truth_samples, make_rng(seed, STREAM_TRUTH))


def _mean_delay(plan: SignalPlan, band: BandSolution, draws: list[dict[str, float]], geom: ArterialGeometry) -> float:
    return math.fsum(evaluate_delay(plan, q, geom, band) for q in draws) / len(draws)


def pipeline_delay(
    scn: Scenario | PipelineContext,
    a: Sequence[bool],
    eps: Sequence[float],
    seed: int,
    *,
    observations: Mapping[ObservationKey, FoQDataset] | None = None,
) -> PipelineOutcome:
    ctx = _context(scn)
    if len(a) != ctx.scenario.n_mps or len(eps) != ctx.scenario.n_mps:
        raise ValueError(f"need one participation flag and one budget per MP ({ctx.scenario.n_mps})")

    if not any(a):
        estimate = estimate_demands([], ctx.observed)
        draws = _truth_draws(ctx, estimate, seed)
        baseline = _mean_delay(ctx.outdated_plan, ctx.outdated_band, draws, ctx.geometry)
        return PipelineOutcome(delay_s=baseline, baseline_s=baseline)

    if observations is None:
        observations = collect_observations(ctx, seed)
    releases = share(ctx, observations, a, eps, seed)
    flags = [flag for r in releases for flag in r.flags]
    estimate = estimate_demands(releases, ctx.observed)
    decision = signal_policy(estimate.flows(), ctx.geometry, ctx.scenario.timing_settings())
    flags.extend(decision.flags)

    draws = _truth_draws(ctx, estimate, seed)
    delay = _mean_delay(decision.plan, decision.band, draws, ctx.geometry)
    baseline = _mean_delay(ctx.outdated_plan, ctx.outdated_band, draws, ctx.geometry)
    if flags:
        logger.debug("seed %d: pipeline flags %s", seed, sorted(set(flags)))
    return PipelineOutcome(delay_s=delay, baseline_s=baseline, flags=flags)


def oracle_delay(scn: Scenario | PipelineContext) -> float:
    """Delay of the plan built from the true demands themselves."""
    ctx = _context(scn)
    decision = signal_policy(ctx.q_true, ctx.geometry, ctx.scenario.timing_settings())
    return evaluate_delay(decision.plan, ctx.q_true, ctx.geometry, decision.band)


def baseline_delay(scn: Scenario | PipelineContext) -> float:
    """Delay of the outdated plan on the true demands."""
    ctx = _context(scn)
    return evaluate_delay(ctx.outdated_plan, ctx.q_true, ctx.geometry, ctx.outdated_band)
