from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

Direction = Literal["outbound", "inbound", "side"]

DEFAULT_CRUISE_SPEED_MPS = 12.0


class Intersection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    lost_time_s: float = Field(gt=0.0)
    phases: list[str] = Field(min_length=1)
    e: float = Field(default=0.0, ge=0.0, description="outbound queue clearance advance, cycles")
    e_bar: float = Field(default=0.0, ge=0.0, description="inbound queue clearance advance, cycles")
    delta: float = Field(default=0.0, description="outbound/inbound red-centre shift, cycles")


class TimedMovement(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    intersection: str
    phase: str
    direction: Direction
    capacity: float = Field(gt=0.0, description="veh/s")


class ArterialGeometry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    intersections: list[Intersection] = Field(min_length=1)
    segments_m: list[float] = Field(default_factory=list)
    approach_links_m: list[float] = Field(default_factory=list)
    cruise_speed_mps: float = Field(default=DEFAULT_CRUISE_SPEED_MPS, gt=0.0)
    inbound_cruise_speed_mps: float | None = Field(default=None, gt=0.0)
    movements: list[TimedMovement] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self) -> ArterialGeometry:
        if len(self.segments_m) != len(self.intersections) - 1:
            raise ValueError(
                f"segments_m needs {len(self.intersections) - 1} lengths for {len(self.intersections)} intersections"
            )
        if any(length <= 0 for length in self.segments_m):
            raise ValueError("segment lengths must be positive")
        phases = {i.name: set(i.phases) for i in self.intersections}
        if len(phases) != len(self.intersections):
            raise ValueError("intersection names must be unique")
        seen: set[tuple[str, str]] = set()
        for m in self.movements:
            if m.intersection not in phases:
                raise ValueError(f"movement {m.id} references unknown intersection {m.intersection}")
            if m.phase not in phases[m.intersection]:
                raise ValueError(f"movement {m.id} references unknown phase {m.phase}")
            if m.direction != "side":
                key = (m.intersection, m.direction)
                if key in seen:
                    raise ValueError(f"intersection {m.intersection} has two {m.direction} through movements")
                seen.add(key)
        for inter in self.intersections:
            for direction in ("outbound", "inbound"):
                if (inter.name, direction) not in seen:
                    raise ValueError(f"intersection {inter.name} lacks an {direction} through movement")
        return self

    @property
    def names(self) -> list[str]:
        return [i.name for i in self.intersections]

    def intersection(self, name: str) -> Intersection:
        for inter in self.intersections:
            if inter.name == name:
                return inter
        raise KeyError(name)

    def through(self, name: str, direction: Direction) -> TimedMovement:
        for m in self.movements:
            if m.intersection == name and m.direction == direction:
                return m
        raise KeyError(f"{name}/{direction}")

    def travel_times(self, cycle_s: float) -> tuple[np.ndarray, np.ndarray]:
        """Internode travel times in cycles, outbound and inbound."""
        lengths = np.asarray(self.segments_m, dtype=float)
        inbound_speed = self.inbound_cruise_speed_mps or self.cruise_speed_mps
        return lengths / self.cruise_speed_mps / cycle_s, lengths / inbound_speed / cycle_s


class SignalPlan(BaseModel):
    model_config = ConfigDict(extra="forbid")

    cycle_s: float = Field(gt=0.0)
    greens_s: dict[str, dict[str, float]]
    offsets_s: list[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self) -> SignalPlan:
        for name, greens in self.greens_s.items():
            if any(g <= 0 for g in greens.values()):
                raise ValueError(f"intersection {name} has a non-positive green")
        if any(o < 0 or o >= self.cycle_s for o in self.offsets_s):
            raise ValueError("offsets must lie in [0, cycle)")
        return self

    def green(self, movement: TimedMovement) -> float:
        return self.greens_s[movement.intersection][movement.phase]


class BandProblem(BaseModel):
    """Reds, travel times and clearance terms in cycles for one MAXBAND instance."""

    model_config = ConfigDict(extra="forbid")

    red: list[float]
    red_bar: list[float]
    travel: list[float] = Field(default_factory=list)
    travel_bar: list[float] = Field(default_factory=list)
    e: list[float] = Field(default_factory=list)
    e_bar: list[float] = Field(default_factory=list)
    delta: list[float] = Field(default_factory=list)
    w_out: float = Field(default=1.0, ge=0.0)
    w_in: float = Field(default=1.0, ge=0.0)
    alpha: float = Field(default=1.0, gt=0.0)

    @model_validator(mode="after")
    def _check(self) -> BandProblem:
        n = len(self.red)
        if n < 1 or len(self.red_bar) != n:
            raise ValueError("red and red_bar need one entry per intersection")
        if any(not 0.0 < r < 1.0 for r in self.red + self.red_bar):
            raise ValueError("reds must lie in (0, 1) cycles")
        for name in ("e", "e_bar", "delta"):
            values = getattr(self, name)
            if not values:
                setattr(self, name, [0.0] * n)
            elif len(values) != n:
                raise ValueError(f"{name} needs one entry per intersection")
        for name in ("travel", "travel_bar"):
            if len(getattr(self, name)) != n - 1:
                raise ValueError(f"{name} needs one entry per segment")
        return self

    @property
    def size(self) -> int:
        return len(self.red)


class BandSolution(BaseModel):
    model_config = ConfigDict(extra="forbid")

    b: float = Field(ge=0.0)
    b_bar: float = Field(ge=0.0)
    zeta: list[float]
    zeta_bar: list[float]
    m: list[int] = Field(default_factory=list)
    objective: float = 0.0
    feasible: bool = True


class TimingSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    c_min: float = Field(default=40.0, gt=0.0)
    c_max: float = Field(default=180.0, gt=0.0)
    min_green_s: float = Field(default=5.0, ge=0.0)
    alpha: float = Field(default=1.0, gt=0.0)
    y_cap: float = Field(default=0.95, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _check(self) -> TimingSettings:
        if self.c_max < self.c_min:
            raise ValueError("c_max must not be below c_min")
        return self
