from __future__ import annotations

import logging
from typing import Mapping

from pydantic import BaseModel, ConfigDict, Field

from .maxband import build_band_problem, maxband_solve, offsets_from_band
from .models import ArterialGeometry, BandProblem, BandSolution, SignalPlan, TimingSettings
from .webster import critical_ratio, flow_ratios, webster_cycle, webster_splits

logger = logging.getLogger(__name__)

OVERSATURATED_ESTIMATE = "oversaturated_estimate"
ZERO_BAND = "zero_band"


class PolicyOutcome(BaseModel):
    model_config = ConfigDict(extra="forbid")

    plan: SignalPlan
    band: BandSolution
    problem: BandProblem
    flags: list[str] = Field(default_factory=list)


def cap_estimated_flows(
    q_hat: Mapping[str, float],
    geom: ArterialGeometry,
    y_cap: float,
) -> tuple[dict[str, float], bool]:
    """Scale each intersection's flows down so its critical ratio stays at or below y_cap."""
    flows = {k: max(float(v), 0.0) for k, v in q_hat.items()}
    ratios = flow_ratios(flows, geom)
    capped = False
    for inter in geom.intersections:
        y = critical_ratio(ratios[inter.name])
        if y <= y_cap:
            continue
        capped = True
        scale = y_cap / y
        logger.debug("intersection %s: estimated Y=%.3f scaled to %.3f", inter.name, y, y_cap)
        for m in geom.movements:
            if m.intersection == inter.name and m.id in flows:
                flows[m.id] *= scale
    return flows, capped


def signal_policy(
    q_hat: Mapping[str, float],
    geom: ArterialGeometry,
    settings: TimingSettings | None = None,
) -> PolicyOutcome:
    settings = settings or TimingSettings()
    flows, capped = cap_estimated_flows(q_hat, geom, settings.y_cap)
    cycle = webster_cycle(flows, geom, settings.c_min, settings.c_max)
    greens = webster_splits(flows, geom, cycle, settings.min_green_s)
    problem = build_band_problem(geom, cycle, greens, flows, settings.alpha)
    band = maxband_solve(problem)
    offsets = [0.0, *offsets_from_band(band, problem, cycle)]
    flags = []
    if capped:
        flags.append(OVERSATURATED_ESTIMATE)
    if not band.feasible:
        flags.append(ZERO_BAND)
    return PolicyOutcome(
        plan=SignalPlan(cycle_s=cycle, greens_s=greens, offsets_s=offsets),
        band=band,
        problem=problem,
        flags=flags,
    )
