from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

QueueCase = Literal["case1", "case2"]
FlowSource = Literal["data", "prior"]

DEFAULT_PRIOR_VPH = 200.0
DEFAULT_PRIOR_SD_VPH = 400.0
DEFAULT_JITTER = 0.1


class FundamentalDiagram(BaseModel):
    """Triangular flow-density relation; speeds in m/s, densities in veh/m across all lanes."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    v_f: float = Field(gt=0.0)
    w: float = Field(gt=0.0)
    k_j: float = Field(gt=0.0)

    @property
    def critical_density(self) -> float:
        return self.w * self.k_j / (self.v_f + self.w)

    @property
    def capacity(self) -> float:
        return self.v_f * self.critical_density

    def queue_slope(self, q: float) -> float:
        """Speed (negative, m/s) of the shockwave between arrivals at flow q and the jam state."""
        return -q * self.v_f / (self.v_f * self.k_j - q)


class MovementConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    q: float = Field(gt=0.0, description="arrival flow, veh/s")
    red: float = Field(gt=0.0, description="effective red, s")
    cycles: int = Field(default=20, ge=1)
    penetration: float = Field(default=1.0, gt=0.0, le=1.0)
    case: QueueCase = "case1"
    upstream_discharge_s: float = Field(default=0.0, ge=0.0)
    jitter: float = Field(default=DEFAULT_JITTER, ge=0.0, lt=1.0)
    position_noise_m: float = Field(default=0.0, ge=0.0)
    link_length_m: float | None = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def _check_case(self) -> MovementConfig:
        if self.case == "case2" and self.upstream_discharge_s <= 0:
            raise ValueError("case2 movements need a positive upstream discharge duration")
        return self


class RegressionEstimate(BaseModel):
    model_config = ConfigDict(extra="forbid")

    slope: float
    intercept: float | None = None
    residual_variance: float = Field(ge=0.0)
    slope_variance: float = Field(ge=0.0)
    intercept_variance: float | None = None
    n: int


class ObservedMovement(BaseModel):
    """What the authority knows about a movement when turning FoQ data into a flow estimate."""

    model_config = ConfigDict(extra="forbid")

    movement_id: str
    fd: FundamentalDiagram
    case: QueueCase = "case1"
    upstream_discharge_s: float = 0.0
    prior_flow: float = Field(default=DEFAULT_PRIOR_VPH / 3600.0, ge=0.0)
    prior_flow_sd: float = Field(default=DEFAULT_PRIOR_SD_VPH / 3600.0, gt=0.0)


class MovementEstimate(BaseModel):
    model_config = ConfigDict(extra="forbid")

    movement_id: str
    slope_mean: float | None = None
    slope_variance: float | None = None
    flow: float = Field(ge=0.0)
    flow_variance: float = Field(ge=0.0)
    capacity: float = Field(gt=0.0)
    source: FlowSource = "data"
    n_sources: int = 0


class DemandEstimate(BaseModel):
    model_config = ConfigDict(extra="forbid")

    movements: dict[str, MovementEstimate] = Field(default_factory=dict)

    def flows(self) -> dict[str, float]:
        return {m: est.flow for m, est in self.movements.items()}
