from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

Utility = Callable[[np.ndarray], float]
Profile = tuple[int, ...]

EquilibriumKind = Literal["pure", "mixed", "none"]
EvaluationStatus = Literal["solved", "infeasible", "nonconvergent"]


@dataclass(frozen=True)
class FollowerSpec:
    """A data owner: utility handle over the full budget vector z, privacy weight and budget floor.

    ``ceiling`` bounds z_k from above (1 unless utilities are only known on a smaller grid) and
    ``breakpoints`` lists own-coordinate values where the utility may kink; both are checked
    explicitly by the best-response search.
    """

    id: int
    utility: Utility
    beta: float = 0.0
    floor: float = 0.0
    ceiling: float = 1.0
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0 (follower {self.id}: {self.beta})")
        if not 0.0 <= self.floor <= 1.0:
            raise ValueError(f"floor must lie in [0, 1] (follower {self.id}: {self.floor})")
        if not 0.0 <= self.ceiling <= 1.0:
            raise ValueError(f"ceiling must lie in [0, 1] (follower {self.id}: {self.ceiling})")

    def payoff(self, z: np.ndarray, own: int) -> float:
        return float(self.utility(z)) - self.beta * float(z[own])

    def with_floor(self, floor: float) -> FollowerSpec:
        return replace(self, floor=float(floor))


@dataclass(frozen=True)
class DistortionProfile:
    """Expected distortion Phi(eps) of released data; must decrease strictly on (0, 1]."""

    phi_fn: Callable[[float], float]
    description: str = ""

    def __post_init__(self) -> None:
        grid = np.geomspace(1e-6, 1.0, 25)
        values = np.array([float(self.phi_fn(float(eps))) for eps in grid])
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValueError("distortion profile must be positive and finite on (0, 1]")
        if np.any(np.diff(values) >= 0):
            raise ValueError("distortion profile must be strictly decreasing on (0, 1]")

    def __call__(self, eps: float) -> float:
        return float(self.phi_fn(float(eps)))


@dataclass
class ValueTable:
    values: dict[Profile, np.ndarray] = field(default_factory=dict)
    z_star: dict[Profile, np.ndarray] = field(default_factory=dict)

    @property
    def n_players(self) -> int:
        if not self.values:
            return 0
        return len(next(iter(self.values)))

    def profiles(self) -> list[Profile]:
        return sorted(self.values)

    def payoff(self, a: Profile, k: int) -> float:
        return float(self.values[a][k])


class ActionProfile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    a: list[bool] = Field(default_factory=list)
    z: list[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self) -> ActionProfile:
        if len(self.a) != len(self.z):
            raise ValueError("participation and budget vectors differ in length")
        for k, (share, z_k) in enumerate(zip(self.a, self.z)):
            if not share and z_k != 0.0:
                raise ValueError(f"follower {k} does not share but has z={z_k}")
            if share and not 0.0 <= z_k <= 1.0:
                raise ValueError(f"follower {k} budget {z_k} outside [0, 1]")
        return self


class MixedProfile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    probs: list[float] = Field(default_factory=list)
    regret: float = 0.0

    @model_validator(mode="after")
    def _check(self) -> MixedProfile:
        if any(p < 0.0 or p > 1.0 for p in self.probs):
            raise ValueError("mixing probabilities must lie in [0, 1]")
        return self


class LeaderEvaluation(BaseModel):
    model_config = ConfigDict(extra="forbid")

    d: list[float]
    floors: list[float | None] = Field(default_factory=list)
    status: EvaluationStatus = "solved"
    kind: EquilibriumKind = "none"
    profile: ActionProfile | None = None
    mixed: MixedProfile | None = None
    leader_value: float | None = None
    gains: list[float | None] = Field(default_factory=list)


class SneResult(BaseModel):
    model_config = ConfigDict(extra="forbid")

    leader_choice: list[float]
    floors: list[float | None] = Field(default_factory=list)
    follower_profile: ActionProfile | None = None
    mixed_profile: MixedProfile | None = None
    leader_value: float
    evaluations: list[LeaderEvaluation] = Field(default_factory=list)
