from __future__ import annotations

from pathlib import Path

import pytest

from conftest import SINGLE_INTERSECTION, scenario_config, write_scenario
from privflow.config import (
    DEFAULT_MC_CONFIG,
    SCENARIO_PATH_ENV,
    apply_defaults,
    apply_overrides,
    get_project_root,
    load_config,
    resolve_scenario_path,
)
from privflow.errors import ScenarioError
from privflow.sim.scenario import build_scenario

SHIPPED = sorted((get_project_root() / "scenarios").glob("*.yaml"))


def test_load_config_applies_defaults(tmp_path: Path) -> None:
    path = write_scenario(tmp_path / "scenario.yaml", scenario_config())
    cfg = load_config(path)
    assert cfg["network"]["timing"]["c_max"] == 180.0
    assert cfg["demand"]["cycles"] == 20
    assert cfg["dp"]["t_max_s"] == 120.0
    assert cfg["mc"]["samples"] == 4
    assert cfg["mc"]["truth"] == DEFAULT_MC_CONFIG["truth"]
    assert cfg["game"]["concavity_check"] is True


def test_missing_section_is_named(tmp_path: Path) -> None:
    cfg = scenario_config()
    del cfg["mps"]
    path = write_scenario(tmp_path / "scenario.yaml", cfg)
    with pytest.raises(ScenarioError, match="Missing required config section: mps"):
        load_config(path)


def test_mps_must_be_a_list(tmp_path: Path) -> None:
    path = write_scenario(tmp_path / "scenario.yaml", scenario_config(mps={"id": 1}))
    with pytest.raises(ScenarioError, match="non-empty list"):
        load_config(path)


def test_invalid_yaml_is_reported(tmp_path: Path) -> None:
    path = tmp_path / "broken.yaml"
    path.write_text("network: [unclosed\n", encoding="utf-8")
    with pytest.raises(ScenarioError, match="not valid YAML"):
        load_config(path)


def test_top_level_must_be_a_mapping(tmp_path: Path) -> None:
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ScenarioError, match="mapping"):
        load_config(path)


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(ScenarioError, match="not found"):
        load_config(tmp_path / "nope.yaml")


def test_env_var_selects_scenario(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    path = write_scenario(tmp_path / "scenario.yaml", scenario_config())
    monkeypatch.setenv(SCENARIO_PATH_ENV, str(path))
    assert resolve_scenario_path() == path
    assert load_config()["mps"][0]["id"] == 1


def test_no_scenario_and_no_env(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv(SCENARIO_PATH_ENV, raising=False)
    with pytest.raises(ScenarioError, match=SCENARIO_PATH_ENV):
        resolve_scenario_path()


def test_relative_path_falls_back_to_project_root(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    assert resolve_scenario_path("scenarios/arterial.yaml") == get_project_root() / "scenarios" / "arterial.yaml"


def test_overrides_leave_input_untouched() -> None:
    cfg = apply_defaults(scenario_config())
    out = apply_overrides(cfg, seed=99, samples=2, eps_grid=[0.2], threads=3)
    assert out["mc"]["seed"] == 99 and out["mc"]["samples"] == 2 and out["mc"]["threads"] == 3
    assert out["game"]["eps_grid"] == [0.2]
    assert cfg["mc"]["seed"] == 11
    assert cfg["game"]["eps_grid"] == [0.3, 0.9]


def test_scalar_settings_are_coerced() -> None:
    cfg = apply_defaults(scenario_config(mc={"samples": "8", "seed": "3", "common_random_numbers": "no"}))
    assert cfg["mc"]["samples"] == 8
    assert cfg["mc"]["seed"] == 3
    assert cfg["mc"]["common_random_numbers"] is False
    assert cfg["mc"]["threads"] is None


@pytest.mark.parametrize(
    "section, value, where",
    [("mc", {"samples": "many"}, "mc.samples"), ("dp", {"delta": "small"}, "dp.delta")],
)
def test_malformed_scalar_setting_is_rejected(section: str, value: dict, where: str) -> None:
    with pytest.raises(ScenarioError, match=rf"Invalid scenario setting {where}"):
        apply_defaults(scenario_config(**{section: value}))


def test_invalid_value_reports_its_path() -> None:
    cfg = apply_defaults(scenario_config(mps=[{"id": 1, "penetration": 1.5, "beta": 5}]))
    with pytest.raises(ScenarioError, match=r"Invalid scenario at mps\.0\.penetration"):
        build_scenario(cfg)


def test_unknown_keys_are_rejected() -> None:
    cfg = apply_defaults(scenario_config(mps=[{"id": 1, "penetration": 0.5, "bogus": 1}]))
    with pytest.raises(ScenarioError, match="bogus"):
        build_scenario(cfg)


def test_flows_must_cover_every_movement() -> None:
    demand = dict(SINGLE_INTERSECTION["demand"], flows_vph={"A_out": 2000, "A_in": 1600})
    with pytest.raises(ScenarioError, match="A_cross"):
        build_scenario(apply_defaults(scenario_config(demand=demand)))


def test_leader_grid_rows_need_one_value_per_mp() -> None:
    game = {"eps_grid": [0.3, 0.9], "leader_floor_grid": [[0.3, 0.3]]}
    with pytest.raises(ScenarioError, match="one per MP"):
        build_scenario(apply_defaults(scenario_config(game=game)))


def test_leader_grid_kinds_are_exclusive() -> None:
    game = {"eps_grid": [0.3], "leader_grid": [[1.0]], "leader_floor_grid": [[0.3]]}
    with pytest.raises(ScenarioError, match="exactly one"):
        build_scenario(apply_defaults(scenario_config(game=game)))


def test_eps_grid_must_increase_inside_unit_interval() -> None:
    for grid in ([0.5, 0.3], [0.3, 1.0]):
        game = {"eps_grid": grid, "leader_floor_grid": [[0.3]]}
        with pytest.raises(ScenarioError, match="eps_grid"):
            build_scenario(apply_defaults(scenario_config(game=game)))


def test_outdated_plan_must_fill_the_cycle() -> None:
    network = dict(SINGLE_INTERSECTION["network"])
    network["outdated_plan"] = {"cycle_s": 60, "greens_s": {"A": {"main": 30, "cross": 30}}}
    with pytest.raises(ScenarioError, match="lost time"):
        build_scenario(apply_defaults(scenario_config(network=network)))


def test_unknown_rho_component() -> None:
    dp = {"delta": 0.05, "rho": {"x": 0.1}}
    with pytest.raises(ScenarioError, match="rho"):
        build_scenario(apply_defaults(scenario_config(dp=dp)))


@pytest.mark.parametrize("path", SHIPPED, ids=[p.stem for p in SHIPPED])
def test_shipped_scenarios_build(path: Path) -> None:
    scn = build_scenario(load_config(path))
    assert scn.n_mps >= 1
    assert set(scn.true_flows()) == set(scn.movement_ids)
