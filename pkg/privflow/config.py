from __future__ import annotations

import os
from pathlib import Path
from typing import Any

import yaml
from pydantic import TypeAdapter, ValidationError

from .errors import ScenarioError

REQUIRED_TOP_LEVEL = ("network", "demand", "mps", "game", "dp", "mc")
SCENARIO_PATH_ENV = "PRIVFLOW_SCENARIO_PATH"

DEFAULT_TIMING_CONFIG = {
    "c_min": 40.0,
    "c_max": 180.0,
    "min_green_s": 5.0,
    "alpha": 1.0,
    "y_cap": 0.95,
}

DEFAULT_DEMAND_CONFIG = {
    "cycles": 20,
    "jitter": 0.1,
    "position_noise_m": 0.0,
    "prior_vph": 200.0,
    "prior_sd_vph": 400.0,
}

DEFAULT_DP_CONFIG = {
    "delta": 0.05,
    "t_max_s": 120.0,
    "h_max_m": 300.0,
}

DEFAULT_MC_CONFIG = {
    "samples": 64,
    "seed": 0,
    "threads": None,
    "truth": "scenario",
    "truth_samples": 16,
    "common_random_numbers": True,
}

DEFAULT_GAME_CONFIG = {
    "concavity_check": True,
}


def get_project_root() -> Path:
    """Project root (directory containing the privflow package and pyproject.toml)."""
    return Path(__file__).resolve().parents[1]


def _coerce(value: Any, kind: type, default: Any, where: str) -> Any:
    """Lax pydantic coercion of one scalar setting; None keeps the default."""
    if value is None:
        return default
    try:
        return TypeAdapter(kind).validate_python(value)
    except ValidationError as exc:
        raise ScenarioError(f"Invalid scenario setting {where}: {exc.errors()[0]['msg']}") from exc


def resolve_scenario_path(path: str | Path | None = None) -> Path:
    selected = path or os.getenv(SCENARIO_PATH_ENV)
    if not selected:
        raise ScenarioError(f"No scenario given and {SCENARIO_PATH_ENV} is not set")
    scenario_path = Path(selected)
    if not scenario_path.is_absolute() and not scenario_path.exists():
        scenario_path = get_project_root() / scenario_path
    return scenario_path


def load_config(path: str | Path | None = None) -> dict[str, Any]:
    scenario_path = resolve_scenario_path(path)
    if not scenario_path.exists():
        raise ScenarioError(f"Scenario file not found: {scenario_path}")
    try:
        data = yaml.safe_load(scenario_path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ScenarioError(f"Scenario file {scenario_path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"Scenario file {scenario_path} must hold a mapping at the top level")
    for key in REQUIRED_TOP_LEVEL:
        if key not in data:
            raise ScenarioError(f"Missing required config section: {key}")
    for key in REQUIRED_TOP_LEVEL:
        if key == "mps":
            if not isinstance(data[key], list) or not data[key]:
                raise ScenarioError("Config section mps must be a non-empty list")
        elif not isinstance(data[key], dict):
            raise ScenarioError(f"Config section {key} must be a mapping")
    return apply_defaults(data)


def apply_defaults(cfg: dict[str, Any]) -> dict[str, Any]:
    """Merge module defaults into a raw scenario dict and coerce scalar settings."""
    merged = dict(cfg)

    network = dict(merged["network"])
    timing = dict(DEFAULT_TIMING_CONFIG)
    timing.update(network.get("timing") or {})
    for key, default in DEFAULT_TIMING_CONFIG.items():
        timing[key] = _coerce(timing.get(key), float, default, f"network.timing.{key}")
    network["timing"] = timing
    merged["network"] = network

    demand = dict(DEFAULT_DEMAND_CONFIG)
    demand.update(merged["demand"])
    demand["cycles"] = max(1, _coerce(demand.get("cycles"), int, DEFAULT_DEMAND_CONFIG["cycles"], "demand.cycles"))
    for key in ("jitter", "position_noise_m", "prior_sd_vph"):
        demand[key] = _coerce(demand.get(key), float, DEFAULT_DEMAND_CONFIG[key], f"demand.{key}")
    if not isinstance(demand.get("prior_vph"), dict):
        demand["prior_vph"] = _coerce(
            demand.get("prior_vph"), float, DEFAULT_DEMAND_CONFIG["prior_vph"], "demand.prior_vph"
        )
    merged["demand"] = demand

    dp = dict(DEFAULT_DP_CONFIG)
    dp.update(merged["dp"])
    for key, default in DEFAULT_DP_CONFIG.items():
        dp[key] = _coerce(dp.get(key), float, default, f"dp.{key}")
    merged["dp"] = dp

    mc = dict(DEFAULT_MC_CONFIG)
    mc.update(merged["mc"])
    for key in ("samples", "seed", "truth_samples"):
        mc[key] = _coerce(mc.get(key), int, DEFAULT_MC_CONFIG[key], f"mc.{key}")
    if mc.get("threads") is not None:
        mc["threads"] = max(1, _coerce(mc["threads"], int, 1, "mc.threads"))
    mc["common_random_numbers"] = _coerce(
        mc.get("common_random_numbers"), bool, True, "mc.common_random_numbers"
    )
    merged["mc"] = mc

    game = dict(DEFAULT_GAME_CONFIG)
    game.update(merged["game"])
    game["concavity_check"] = _coerce(game.get("concavity_check"), bool, True, "game.concavity_check")
    merged["game"] = game
    return merged


def apply_overrides(
    cfg: dict[str, Any],
    *,
    seed: int | None = None,
    samples: int | None = None,
    eps_grid: list[float] | None = None,
    threads: int | None = None,
) -> dict[str, Any]:
    """Command-line overrides on top of a loaded scenario dict."""
    merged = dict(cfg)
    mc = dict(merged["mc"])
    if seed is not None:
        mc["seed"] = seed
    if samples is not None:
        mc["samples"] = samples
    if threads is not None:
        mc["threads"] = threads
    merged["mc"] = mc
    if eps_grid is not None:
        game = dict(merged["game"])
        game["eps_grid"] = eps_grid
        merged["game"] = game
    return merged
