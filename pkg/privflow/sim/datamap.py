from __future__ import annotations

import logging
from typing import Mapping, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from privflow.timing.delay import evaluate_delay
from privflow.timing.policy import signal_policy

from .scenario import Scenario

logger = logging.getLogger(__name__)

DEFAULT_POINTS = 9
GRID_LOW = 0.1
GRID_HIGH = 0.8


class DataUtilityFamily(BaseModel):
    """Delay for one movement family when its estimated and true flows take grid values."""

    model_config = ConfigDict(extra="forbid")

    family: str
    movements: list[str]
    q_hat_vph: list[float]
    q_vph: list[float]
    delay_s: list[list[float]] = Field(description="rows follow q_hat_vph, columns follow q_vph")

    @model_validator(mode="after")
    def _check(self) -> DataUtilityFamily:
        if len(self.delay_s) != len(self.q_hat_vph) or any(len(r) != len(self.q_vph) for r in self.delay_s):
            raise ValueError("delay grid shape must match the flow grids")
        if not np.all(np.isfinite(np.asarray(self.delay_s))):
            raise ValueError("delay grid must be finite")
        return self


class DataUtilityMap(BaseModel):
    model_config = ConfigDict(extra="forbid")

    families: list[DataUtilityFamily]


def family_grid(scn: Scenario, family: str, points: int = DEFAULT_POINTS) -> list[float]:
    """Default flow grid in veh/h: fractions of the smallest capacity among the family's movements."""
    geom = scn.geometry()
    capacity = min(m.capacity for m in geom.movements if m.direction == family)
    return [float(v) for v in np.linspace(GRID_LOW, GRID_HIGH, points) * capacity * 3600.0]


def _with_family(base: Mapping[str, float], movements: Sequence[str], vph: float) -> dict[str, float]:
    flows = dict(base)
    for m in movements:
        flows[m] = vph / 3600.0
    return flows


def data_utility_map(
    scn: Scenario,
    q_hat_grid: Mapping[str, Sequence[float]] | None = None,
    q_grid: Mapping[str, Sequence[float]] | None = None,
    *,
    points: int = DEFAULT_POINTS,
) -> DataUtilityMap:
    """For each family and (q_hat, q) pair: build the plan from q_hat, evaluate it on q."""
    geom = scn.geometry()
    settings = scn.timing_settings()
    truth = scn.true_flows()
    families = []
    for family in ("outbound", "inbound", "side"):
        movements = [m.id for m in geom.movements if m.direction == family]
        if not movements:
            continue
        hats = list((q_hat_grid or {}).get(family) or family_grid(scn, family, points))
        trues = list((q_grid or {}).get(family) or family_grid(scn, family, points))
        rows = []
        for q_hat in hats:
            decision = signal_policy(_with_family(truth, movements, q_hat), geom, settings)
            rows.append(
                [
                    evaluate_delay(decision.plan, _with_family(truth, movements, q), geom, decision.band)
                    for q in trues
                ]
            )
        logger.debug("data-utility map for %s: %d x %d", family, len(hats), len(trues))
        families.append(
            DataUtilityFamily(family=family, movements=movements, q_hat_vph=hats, q_vph=trues, delay_s=rows)
        )
    return DataUtilityMap(families=families)
