from __future__ import annotations

import math
from typing import Mapping

from .models import ArterialGeometry, BandSolution, SignalPlan, TimedMovement

SATURATION_CAP = 0.98
PF_FLOOR = 0.15


def progression_factor(movement: TimedMovement, green_ratio: float, band: BandSolution | None) -> float:
    if band is None or movement.direction == "side":
        return 1.0
    width = band.b if movement.direction == "outbound" else band.b_bar
    return min(max(1.0 - width / green_ratio, PF_FLOOR), 1.0)


def movement_delay(
    movement: TimedMovement,
    plan: SignalPlan,
    flow: float,
    band: BandSolution | None = None,
) -> float:
    """Uniform delay in s/veh scaled by the progression factor."""
    cycle = plan.cycle_s
    lam = plan.green(movement) / cycle
    x = min(max(flow, 0.0) / (movement.capacity * lam), SATURATION_CAP)
    uniform = 0.5 * cycle * (1.0 - lam) ** 2 / (1.0 - x * lam)
    return progression_factor(movement, lam, band) * uniform


def evaluate_delay(
    plan: SignalPlan,
    q_true: Mapping[str, float],
    geom: ArterialGeometry,
    band: BandSolution | None = None,
) -> float:
    """Flow-weighted average delay over all movements, s/veh."""
    delays = []
    weights = []
    for m in geom.movements:
        flow = max(float(q_true.get(m.id, 0.0)), 0.0)
        delays.append(movement_delay(m, plan, flow, band))
        weights.append(flow)
    if not delays:
        return 0.0
    total = math.fsum(weights)
    if total <= 0:
        return math.fsum(delays) / len(delays)
    return math.fsum(w * d for w, d in zip(weights, delays)) / total
