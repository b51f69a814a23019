from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from privflow.errors import BudgetOutOfRange

DEFAULT_T_MAX_S = 120.0
DEFAULT_H_MAX_M = 300.0


class FoQPoint(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    t: float = Field(ge=0.0)
    h: float = Field(le=0.0)


@dataclass(frozen=True)
class FoQDataset:
    """Front-of-queue points (t seconds since red onset, h metres upstream, h <= 0) of one owner and movement."""

    t: np.ndarray
    h: np.ndarray
    movement_id: str = ""
    owner_id: int = 0
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float).reshape(-1)
        h = np.asarray(self.h, dtype=float).reshape(-1)
        if t.shape != h.shape:
            raise ValueError("time and position arrays differ in length")
        if np.any(t < 0) or np.any(h > 0):
            raise ValueError("front-of-queue points need t >= 0 and h <= 0")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "h", h)

    def __len__(self) -> int:
        return int(self.t.size)

    @classmethod
    def from_points(
        cls,
        points: Iterable[FoQPoint | tuple[float, float]],
        movement_id: str = "",
        owner_id: int = 0,
    ) -> FoQDataset:
        pairs = [(p.t, p.h) if isinstance(p, FoQPoint) else (float(p[0]), float(p[1])) for p in points]
        t = np.array([p[0] for p in pairs], dtype=float)
        h = np.array([p[1] for p in pairs], dtype=float)
        return cls(t=t, h=h, movement_id=movement_id, owner_id=owner_id)

    @property
    def points(self) -> list[FoQPoint]:
        return [FoQPoint(t=float(t), h=float(h)) for t, h in zip(self.t, self.h)]

    def select(self, mask: np.ndarray) -> FoQDataset:
        return FoQDataset(
            t=self.t[mask],
            h=self.h[mask],
            movement_id=self.movement_id,
            owner_id=self.owner_id,
            flags=self.flags,
        )

    def to_record(self) -> dict[str, Any]:
        return {
            "movement_id": self.movement_id,
            "owner_id": self.owner_id,
            "points": [[float(t), float(h)] for t, h in zip(self.t, self.h)],
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> FoQDataset:
        return cls.from_points(
            [tuple(p) for p in record.get("points", [])],
            movement_id=str(record.get("movement_id", "")),
            owner_id=int(record.get("owner_id", 0)),
        )


class QueryStats(BaseModel):
    """Sufficient statistics of a FoQ dataset; sum_t and sum_h are present for intercept models."""

    model_config = ConfigDict(extra="forbid")

    lam_t: float = 0.0
    lam_th: float = 0.0
    lam_h: float = 0.0
    n: float = 0.0
    sum_t: float | None = None
    sum_h: float | None = None

    @property
    def has_intercept(self) -> bool:
        return self.sum_t is not None and self.sum_h is not None

    def satisfies_cauchy_schwarz(self) -> bool:
        return self.lam_th**2 <= self.lam_t * self.lam_h * (1.0 + 1e-12) + 1e-12


class SensitivityWeights(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rho_t: float = Field(gt=0.0)
    rho_th: float = Field(gt=0.0)
    rho_h: float = Field(gt=0.0)
    rho_n: float = Field(gt=0.0)
    t_max: float = Field(default=DEFAULT_T_MAX_S, gt=0.0)
    h_max: float = Field(default=DEFAULT_H_MAX_M, gt=0.0)
    rho_sum_t: float | None = Field(default=None, gt=0.0)
    rho_sum_h: float | None = Field(default=None, gt=0.0)

    @field_validator("rho_t", "rho_th", "rho_h", "rho_n", "t_max", "h_max")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not np.isfinite(value):
            raise ValueError("sensitivity weights must be finite")
        return value

    @classmethod
    def balanced(cls, t_max: float = DEFAULT_T_MAX_S, h_max: float = DEFAULT_H_MAX_M) -> SensitivityWeights:
        """Weights that scale every component sensitivity to one."""
        return cls(
            rho_t=1.0 / t_max**2,
            rho_th=1.0 / (t_max * h_max),
            rho_h=1.0 / h_max**2,
            rho_n=1.0,
            t_max=t_max,
            h_max=h_max,
            rho_sum_t=1.0 / t_max,
            rho_sum_h=1.0 / h_max,
        )

    def component_terms(self, intercept: bool = False) -> dict[str, tuple[float, float]]:
        """(sensitivity, weight) per released component."""
        terms = {
            "lam_t": (self.t_max**2, self.rho_t),
            "lam_th": (self.t_max * self.h_max, self.rho_th),
            "lam_h": (self.h_max**2, self.rho_h),
            "n": (1.0, self.rho_n),
        }
        if intercept:
            terms["sum_t"] = (self.t_max, self.rho_sum_t or 1.0 / self.t_max)
            terms["sum_h"] = (self.h_max, self.rho_sum_h or 1.0 / self.h_max)
        return terms


class PrivacyBudget(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    eps: float
    delta: float

    @model_validator(mode="after")
    def _check(self) -> PrivacyBudget:
        if not 0.0 < self.eps < 1.0:
            raise BudgetOutOfRange(f"eps must lie in (0, 1), got {self.eps}")
        if not 0.0 < self.delta < 1.0:
            raise BudgetOutOfRange(f"delta must lie in (0, 1), got {self.delta}")
        return self


class NoiseScales(BaseModel):
    """Public standard deviations of the noise added to each released component."""

    model_config = ConfigDict(extra="forbid")

    lam_t: float = 0.0
    lam_th: float = 0.0
    lam_h: float = 0.0
    n: float = 0.0
    sum_t: float | None = None
    sum_h: float | None = None


class SlopeDistribution(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mean: float
    variance: float = Field(ge=0.0)


@dataclass
class SharedRelease:
    """What a data owner hands to the authority for one movement."""

    owner_id: int
    movement_id: str
    stats: QueryStats
    noise: NoiseScales
    points: FoQDataset | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        return bool(self.flags)
