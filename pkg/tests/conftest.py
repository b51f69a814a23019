from __future__ import annotations

import copy
import sys
from pathlib import Path
from typing import Any

import pytest
import yaml

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from privflow.config import apply_defaults  # noqa: E402
from privflow.sim.scenario import Scenario, build_scenario  # noqa: E402
from privflow.timing.models import ArterialGeometry, Intersection, TimedMovement  # noqa: E402

NOISY_RHO = {"t": 0.02, "th": 0.02, "h": 0.02, "n": 0.00002}

SINGLE_INTERSECTION: dict[str, Any] = {
    "network": {
        "intersections": [{"name": "A", "lost_time_s": 12, "phases": ["main", "cross"]}],
        "segments_m": [],
        "approach_links_m": [600, 600],
        "movements": [
            {"id": "A_out", "intersection": "A", "phase": "main", "direction": "outbound", "lanes": 2},
            {"id": "A_in", "intersection": "A", "phase": "main", "direction": "inbound", "lanes": 2},
            {"id": "A_cross", "intersection": "A", "phase": "cross", "direction": "side", "lanes": 1},
        ],
        "outdated_plan": {"cycle_s": 60, "greens_s": {"A": {"main": 24, "cross": 24}}},
    },
    "demand": {"flows_vph": {"A_out": 2000, "A_in": 1600, "A_cross": 400}, "prior_vph": 800},
    "mps": [{"id": 1, "penetration": 0.5, "beta": 5}],
    "game": {"eps_grid": [0.3, 0.9], "leader_floor_grid": [[0.3], [0.9]]},
    "dp": {"delta": 0.05, "rho": NOISY_RHO},
    "mc": {"samples": 4, "seed": 11, "threads": 1},
}

TWO_INTERSECTIONS: dict[str, Any] = {
    "network": {
        "intersections": [
            {"name": "W", "lost_time_s": 10, "phases": ["through", "side"]},
            {"name": "E", "lost_time_s": 10, "phases": ["through", "side"]},
        ],
        "segments_m": [720],
        "approach_links_m": [500, 500],
        "movements": [
            {"id": "W_out", "intersection": "W", "phase": "through", "direction": "outbound", "lanes": 2},
            {"id": "W_in", "intersection": "W", "phase": "through", "direction": "inbound", "lanes": 2},
            {"id": "W_side", "intersection": "W", "phase": "side", "direction": "side"},
            {"id": "E_out", "intersection": "E", "phase": "through", "direction": "outbound", "lanes": 2},
            {"id": "E_in", "intersection": "E", "phase": "through", "direction": "inbound", "lanes": 2},
            {"id": "E_side", "intersection": "E", "phase": "side", "direction": "side"},
        ],
        "outdated_plan": {
            "cycle_s": 70,
            "greens_s": {"W": {"through": 30, "side": 30}, "E": {"through": 30, "side": 30}},
        },
    },
    "demand": {
        "flows_vph": {"W_out": 2200, "W_in": 2200, "W_side": 300, "E_out": 2200, "E_in": 2200, "E_side": 300},
        "prior_vph": 1200,
    },
    "mps": [{"id": 1, "penetration": 0.3, "beta": 1}, {"id": 2, "penetration": 0.3, "beta": 1}],
    "game": {"eps_grid": [0.4, 0.8], "leader_floor_grid": [[0.4, 0.4], [0.8, 0.8]]},
    "dp": {"delta": 0.05, "rho": NOISY_RHO},
    "mc": {"samples": 3, "seed": 5, "threads": 1},
}


def scenario_config(base: dict[str, Any] = SINGLE_INTERSECTION, **sections: Any) -> dict[str, Any]:
    """Deep copy of a base scenario dict with whole top-level sections replaced."""
    cfg = copy.deepcopy(base)
    for name, value in sections.items():
        cfg[name] = value
    return cfg


def make_scenario(base: dict[str, Any] = SINGLE_INTERSECTION, **sections: Any) -> Scenario:
    return build_scenario(apply_defaults(scenario_config(base, **sections)))


def write_scenario(path: Path, cfg: dict[str, Any]) -> Path:
    path.write_text(yaml.safe_dump(cfg, sort_keys=False), encoding="utf-8")
    return path


def corridor(n: int = 1, *, capacity: float = 1.0, lost_time_s: float = 12.0, segment_m: float = 600.0) -> ArterialGeometry:
    """n two-phase intersections: through movements on "main", a side street on "cross"."""
    names = [f"I{i + 1}" for i in range(n)]
    movements = []
    for name in names:
        movements += [
            TimedMovement(id=f"{name}_out", intersection=name, phase="main", direction="outbound", capacity=capacity),
            TimedMovement(id=f"{name}_in", intersection=name, phase="main", direction="inbound", capacity=capacity),
            TimedMovement(id=f"{name}_cross", intersection=name, phase="cross", direction="side", capacity=capacity),
        ]
    return ArterialGeometry(
        intersections=[Intersection(name=name, lost_time_s=lost_time_s, phases=["main", "cross"]) for name in names],
        segments_m=[segment_m] * (n - 1),
        movements=movements,
    )


def corridor_flows(geom: ArterialGeometry, main: float, cross: float) -> dict[str, float]:
    return {m.id: cross if m.direction == "side" else main for m in geom.movements}


@pytest.fixture
def single_scenario() -> Scenario:
    return make_scenario()


@pytest.fixture
def two_mp_scenario() -> Scenario:
    return make_scenario(TWO_INTERSECTIONS)
