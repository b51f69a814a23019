from __future__ import annotations

import logging
import math
from typing import Mapping

from privflow.errors import InfeasibleMinGreen, Oversaturated

from .models import ArterialGeometry

logger = logging.getLogger(__name__)


def flow_ratios(q_hat: Mapping[str, float], geom: ArterialGeometry) -> dict[str, dict[str, float]]:
    """Per intersection and phase, the largest flow ratio q / capacity among its movements."""
    ratios: dict[str, dict[str, float]] = {i.name: {p: 0.0 for p in i.phases} for i in geom.intersections}
    for m in geom.movements:
        q = max(float(q_hat.get(m.id, 0.0)), 0.0)
        phase = ratios[m.intersection]
        phase[m.phase] = max(phase[m.phase], q / m.capacity)
    return ratios


def critical_ratio(ratios: Mapping[str, float]) -> float:
    return math.fsum(ratios.values())


def webster_cycle(
    q_hat: Mapping[str, float],
    geom: ArterialGeometry,
    c_min: float = 40.0,
    c_max: float = 180.0,
) -> float:
    """Common cycle: the largest per-intersection Webster cycle, clamped to [c_min, c_max]."""
    ratios = flow_ratios(q_hat, geom)
    cycle = c_min
    for inter in geom.intersections:
        y = critical_ratio(ratios[inter.name])
        if y >= 1.0:
            raise Oversaturated(f"intersection {inter.name} has critical flow ratio Y={y:.3f} >= 1")
        cycle = max(cycle, (1.5 * inter.lost_time_s + 5.0) / (1.0 - y))
    return min(max(cycle, c_min), c_max)


def _split(ratios: Mapping[str, float], effective: float, min_green: float, name: str) -> dict[str, float]:
    phases = list(ratios)
    if min_green * len(phases) > effective + 1e-9:
        raise InfeasibleMinGreen(
            f"intersection {name}: {len(phases)} phases x {min_green:g}s exceed {effective:g}s of effective green"
        )
    y = critical_ratio(ratios)
    if y <= 0:
        return {p: effective / len(phases) for p in phases}
    greens = {p: effective * ratios[p] / y for p in phases}
    # raise short phases to the floor and share the remainder among the rest
    fixed: set[str] = set()
    while True:
        short = {p for p in phases if p not in fixed and greens[p] < min_green}
        if not short:
            return greens
        fixed |= short
        free = [p for p in phases if p not in fixed]
        remaining = effective - min_green * len(fixed)
        weight = math.fsum(ratios[p] for p in free)
        for p in fixed:
            greens[p] = min_green
        for p in free:
            greens[p] = remaining * ratios[p] / weight if weight > 0 else remaining / len(free)


def webster_splits(
    q_hat: Mapping[str, float],
    geom: ArterialGeometry,
    cycle_s: float,
    min_green_s: float = 5.0,
) -> dict[str, dict[str, float]]:
    ratios = flow_ratios(q_hat, geom)
    greens = {}
    for inter in geom.intersections:
        effective = cycle_s - inter.lost_time_s
        if effective <= 0:
            raise InfeasibleMinGreen(f"intersection {inter.name}: cycle {cycle_s:g}s is below lost time")
        greens[inter.name] = _split(ratios[inter.name], effective, min_green_s, inter.name)
    logger.debug("webster splits at C=%.1fs: %s", cycle_s, greens)
    return greens
