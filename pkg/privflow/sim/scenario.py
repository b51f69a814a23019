from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from privflow.errors import ScenarioError
from privflow.privacy.models import DEFAULT_H_MAX_M, DEFAULT_T_MAX_S, SensitivityWeights
from privflow.timing.models import (
    DEFAULT_CRUISE_SPEED_MPS,
    ArterialGeometry,
    BandSolution,
    Direction,
    Intersection,
    SignalPlan,
    TimedMovement,
    TimingSettings,
)
from privflow.traffic.models import FundamentalDiagram, ObservedMovement, QueueCase

TruthMode = Literal["scenario", "posterior"]

DEFAULT_LANE_FD = FundamentalDiagram(v_f=15.0, w=5.0, k_j=0.15)


class MovementSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    intersection: str
    phase: str
    direction: Direction
    lanes: int = Field(default=1, ge=1)
    fd: FundamentalDiagram | None = Field(default=None, description="per-lane diagram; network default if absent")
    case: QueueCase = "case1"
    upstream_discharge_s: float = Field(default=0.0, ge=0.0)


class OutdatedPlanSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    cycle_s: float = Field(gt=0.0)
    greens_s: dict[str, dict[str, float]]
    offsets_s: list[float] = Field(default_factory=list)
    band_cycles: tuple[float, float] = (0.0, 0.0)

    @field_validator("band_cycles")
    @classmethod
    def _band(cls, value: tuple[float, float]) -> tuple[float, float]:
        if any(v < 0 or v >= 1 for v in value):
            raise ValueError("band widths are cycle fractions in [0, 1)")
        return value


class NetworkSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    intersections: list[Intersection] = Field(min_length=1)
    segments_m: list[float] = Field(default_factory=list)
    approach_links_m: list[float] = Field(default_factory=list)
    cruise_speed_mps: float = Field(default=DEFAULT_CRUISE_SPEED_MPS, gt=0.0)
    inbound_cruise_speed_mps: float | None = Field(default=None, gt=0.0)
    fd: FundamentalDiagram = DEFAULT_LANE_FD
    movements: list[MovementSpec] = Field(min_length=1)
    timing: TimingSettings = Field(default_factory=TimingSettings)
    outdated_plan: OutdatedPlanSpec | None = None


class DemandSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    flows_vph: dict[str, float]
    cycles: int = Field(default=20, ge=1)
    jitter: float = Field(default=0.1, ge=0.0, lt=1.0)
    position_noise_m: float = Field(default=0.0, ge=0.0)
    prior_vph: float | dict[str, float] = 200.0
    prior_sd_vph: float = Field(default=400.0, gt=0.0)

    @field_validator("flows_vph")
    @classmethod
    def _positive(cls, value: dict[str, float]) -> dict[str, float]:
        for key, flow in value.items():
            if flow <= 0:
                raise ValueError(f"flow of {key} must be positive")
        return value


class MpSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: int
    penetration: float = Field(gt=0.0, le=1.0)
    beta: float = Field(default=0.0, ge=0.0)
    kappa: float = Field(default=1.0, ge=0.0)
    movements: list[str] | None = None


class GameSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    eps_grid: list[float] = Field(min_length=1)
    leader_grid: list[list[float]] | None = None
    leader_floor_grid: list[list[float]] | None = None
    concavity_check: bool = True

    @field_validator("eps_grid")
    @classmethod
    def _grid(cls, value: list[float]) -> list[float]:
        if any(not 0.0 < v < 1.0 for v in value):
            raise ValueError("privacy budgets must lie in (0, 1)")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("eps_grid must be strictly increasing")
        return value

    @model_validator(mode="after")
    def _leader(self) -> GameSpec:
        if (self.leader_grid is None) == (self.leader_floor_grid is None):
            raise ValueError("give exactly one of leader_grid or leader_floor_grid")
        grid = self.leader_grid if self.leader_grid is not None else self.leader_floor_grid
        if not grid:
            raise ValueError("leader grid is empty")
        if self.leader_grid is not None and any(d <= 0 for row in grid for d in row):
            raise ValueError("distortion thresholds must be positive")
        if self.leader_floor_grid is not None and any(not 0.0 < f <= 1.0 for row in grid for f in row):
            raise ValueError("budget floors must lie in (0, 1]")
        return self


class DpSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    delta: float = Field(default=0.05, gt=0.0, lt=1.0)
    t_max_s: float = Field(default=DEFAULT_T_MAX_S, gt=0.0)
    h_max_m: float = Field(default=DEFAULT_H_MAX_M, gt=0.0)
    rho: dict[str, float] | None = None

    @field_validator("rho")
    @classmethod
    def _rho(cls, value: dict[str, float] | None) -> dict[str, float] | None:
        if value is None:
            return value
        allowed = {"t", "th", "h", "n", "sum_t", "sum_h"}
        unknown = set(value) - allowed
        if unknown:
            raise ValueError(f"unknown rho components: {sorted(unknown)}")
        return value


class McSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    samples: int = Field(default=64, ge=1)
    seed: int = 0
    threads: int | None = Field(default=None, ge=1)
    truth: TruthMode = "scenario"
    truth_samples: int = Field(default=16, ge=1)
    common_random_numbers: bool = True


class Scenario(BaseModel):
    """A full experiment: arterial, demands, data owners, leader grid and sampling budget."""

    model_config = ConfigDict(extra="forbid")

    network: NetworkSpec
    demand: DemandSpec
    mps: list[MpSpec] = Field(min_length=1)
    game: GameSpec
    dp: DpSpec = Field(default_factory=DpSpec)
    mc: McSpec = Field(default_factory=McSpec)

    @model_validator(mode="after")
    def _cross_check(self) -> Scenario:
        ids = [m.id for m in self.network.movements]
        if len(set(ids)) != len(ids):
            raise ValueError("movement ids must be unique")
        missing = [m for m in ids if m not in self.demand.flows_vph]
        if missing:
            raise ValueError(f"demand.flows_vph lacks movements: {missing}")
        unknown = [m for m in self.demand.flows_vph if m not in ids]
        if unknown:
            raise ValueError(f"demand.flows_vph names unknown movements: {unknown}")
        mp_ids = [mp.id for mp in self.mps]
        if len(set(mp_ids)) != len(mp_ids):
            raise ValueError("MP ids must be unique")
        for mp in self.mps:
            for m in mp.movements or []:
                if m not in ids:
                    raise ValueError(f"MP {mp.id} covers unknown movement {m}")
        grid = self.game.leader_grid if self.game.leader_grid is not None else self.game.leader_floor_grid
        if any(len(row) != len(self.mps) for row in grid or []):
            raise ValueError(f"every leader grid entry needs {len(self.mps)} values, one per MP")
        self.geometry()
        plan = self.network.outdated_plan
        if plan is not None:
            for inter in self.network.intersections:
                greens = plan.greens_s.get(inter.name)
                if greens is None or set(greens) != set(inter.phases):
                    raise ValueError(f"outdated_plan.greens_s needs every phase of {inter.name}")
                if abs(sum(greens.values()) + inter.lost_time_s - plan.cycle_s) > 1e-6:
                    raise ValueError(f"outdated_plan greens plus lost time at {inter.name} must equal the cycle")
            if plan.offsets_s and len(plan.offsets_s) != len(self.network.intersections):
                raise ValueError("outdated_plan.offsets_s needs one offset per intersection")
        return self

    @property
    def n_mps(self) -> int:
        return len(self.mps)

    @property
    def movement_ids(self) -> list[str]:
        return [m.id for m in self.network.movements]

    def movement(self, movement_id: str) -> MovementSpec:
        for m in self.network.movements:
            if m.id == movement_id:
                return m
        raise KeyError(movement_id)

    def movement_fd(self, movement_id: str) -> FundamentalDiagram:
        spec = self.movement(movement_id)
        lane = spec.fd or self.network.fd
        return FundamentalDiagram(v_f=lane.v_f, w=lane.w, k_j=lane.k_j * spec.lanes)

    def geometry(self) -> ArterialGeometry:
        net = self.network
        return ArterialGeometry(
            intersections=net.intersections,
            segments_m=net.segments_m,
            approach_links_m=net.approach_links_m,
            cruise_speed_mps=net.cruise_speed_mps,
            inbound_cruise_speed_mps=net.inbound_cruise_speed_mps,
            movements=[
                TimedMovement(
                    id=m.id,
                    intersection=m.intersection,
                    phase=m.phase,
                    direction=m.direction,
                    capacity=self.movement_fd(m.id).capacity,
                )
                for m in net.movements
            ],
        )

    def true_flows(self) -> dict[str, float]:
        """True demands in veh/s."""
        return {m: self.demand.flows_vph[m] / 3600.0 for m in self.movement_ids}

    def prior_flows(self) -> dict[str, float]:
        prior = self.demand.prior_vph
        if isinstance(prior, dict):
            return {m: float(prior.get(m, 200.0)) / 3600.0 for m in self.movement_ids}
        return {m: float(prior) / 3600.0 for m in self.movement_ids}

    def covered(self, mp: MpSpec) -> list[str]:
        return list(mp.movements) if mp.movements is not None else self.movement_ids

    def observed_movements(self) -> list[ObservedMovement]:
        prior = self.prior_flows()
        return [
            ObservedMovement(
                movement_id=m.id,
                fd=self.movement_fd(m.id),
                case=m.case,
                upstream_discharge_s=m.upstream_discharge_s,
                prior_flow=prior[m.id],
                prior_flow_sd=self.demand.prior_sd_vph / 3600.0,
            )
            for m in self.network.movements
        ]

    def sensitivity_weights(self) -> SensitivityWeights:
        base = SensitivityWeights.balanced(self.dp.t_max_s, self.dp.h_max_m)
        if not self.dp.rho:
            return base
        update: dict[str, Any] = {f"rho_{name}": value for name, value in self.dp.rho.items()}
        return base.model_copy(update=update)

    def timing_settings(self) -> TimingSettings:
        return self.network.timing

    def outdated_plan(self) -> tuple[SignalPlan, BandSolution] | None:
        spec = self.network.outdated_plan
        if spec is None:
            return None
        n = len(self.network.intersections)
        offsets = spec.offsets_s or [0.0] * n
        plan = SignalPlan(cycle_s=spec.cycle_s, greens_s=spec.greens_s, offsets_s=offsets)
        b, b_bar = spec.band_cycles
        band = BandSolution(b=b, b_bar=b_bar, zeta=[0.0] * n, zeta_bar=[0.0] * n)
        return plan, band


def _error_path(exc: ValidationError) -> str:
    first = exc.errors()[0]
    path = ".".join(str(part) for part in first.get("loc", ()))
    return f"{path}: {first.get('msg', 'invalid value')}" if path else str(first.get("msg", exc))


def build_scenario(cfg: dict[str, Any]) -> Scenario:
    try:
        return Scenario.model_validate(cfg)
    except ValidationError as exc:
        raise ScenarioError(f"Invalid scenario at {_error_path(exc)}") from exc
