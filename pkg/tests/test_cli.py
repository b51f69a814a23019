from __future__ import annotations

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

import cli.main as cli_main
from conftest import SINGLE_INTERSECTION, scenario_config, write_scenario
from privflow.config import SCENARIO_PATH_ENV

runner = CliRunner()


def _scenario(tmp_path: Path, **sections: object) -> Path:
    return write_scenario(tmp_path / "scenario.yaml", scenario_config(**sections))


def test_counterexample_has_no_pure_equilibrium() -> None:
    result = runner.invoke(cli_main.app, ["counterexample"])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0].split() == ["a", "V1", "V2", "V3"]
    assert len([ln for ln in lines[1:9] if ln[:3].isdigit()]) == 8
    assert "Pure NE: none" in result.output
    assert "Mixed NE: p=" in result.output


def test_dp_reports_sigma_and_count_budget() -> None:
    result = runner.invoke(cli_main.app, ["dp", "--eps", "0.5", "--delta", "0.01", "--b", "2"])
    assert result.exit_code == 0
    assert "Sensitivity:" in result.output
    assert "Sigma:" in result.output
    assert "sigma[lam_t]" in result.output
    assert "Count-level budget (b=2): eps=1 " in result.output


def test_dp_rejects_budget_outside_unit_interval() -> None:
    result = runner.invoke(cli_main.app, ["dp", "--eps", "1.5", "--delta", "0.01"])
    assert result.exit_code == cli_main.EXIT_CONFIG
    assert "eps must lie in (0, 1)" in result.output


def test_dp_rejects_non_positive_b() -> None:
    result = runner.invoke(cli_main.app, ["dp", "--eps", "0.5", "--delta", "0.01", "--b", "0"])
    assert result.exit_code == cli_main.EXIT_CONFIG
    assert "b must be a positive integer" in result.output


def test_missing_section_exits_with_config_code(tmp_path: Path) -> None:
    cfg = scenario_config()
    del cfg["mps"]
    path = write_scenario(tmp_path / "scenario.yaml", cfg)
    result = runner.invoke(cli_main.app, ["surface", str(path), "--out", str(tmp_path / "out")])
    assert result.exit_code == cli_main.EXIT_CONFIG
    assert "mps" in result.output
    assert not (tmp_path / "out" / "manifest.json").exists()


def test_malformed_grid_exits_with_config_code(tmp_path: Path) -> None:
    path = _scenario(tmp_path)
    result = runner.invoke(cli_main.app, ["surface", str(path), "--grid", "0.1,abc"])
    assert result.exit_code == cli_main.EXIT_CONFIG
    assert "--grid" in result.output


def test_surface_writes_outputs_and_manifest(tmp_path: Path) -> None:
    path = _scenario(tmp_path)
    out = tmp_path / "out"
    result = runner.invoke(cli_main.app, ["surface", str(path), "--out", str(out), "--samples", "2", "--threads", "1"])
    assert result.exit_code == 0, result.output
    for name in ("surface.csv", "surface.json", "surface.svg", "manifest.json"):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "surface"
    assert manifest["base_seed"] == 11
    assert sorted(manifest["outputs"]) == ["surface.csv", "surface.json", "surface.svg"]
    assert "Surface: 3 cells, 2 samples" in result.output


def test_surface_is_reproducible_under_a_seed(tmp_path: Path) -> None:
    path = _scenario(tmp_path)
    args = ["--samples", "2", "--seed", "7", "--grid", "0.5"]
    first = runner.invoke(cli_main.app, ["surface", str(path), "--out", str(tmp_path / "a"), *args])
    second = runner.invoke(cli_main.app, ["surface", str(path), "--out", str(tmp_path / "b"), "--threads", "2", *args])
    assert first.exit_code == 0 and second.exit_code == 0
    csv_a = (tmp_path / "a" / "surface.csv").read_bytes()
    assert csv_a == (tmp_path / "b" / "surface.csv").read_bytes()
    assert len(csv_a.decode("utf-8").splitlines()) == 3


def test_queue_spilling_over_link_exits_with_compute_code(tmp_path: Path) -> None:
    network = dict(SINGLE_INTERSECTION["network"], approach_links_m=[10, 10])
    path = _scenario(tmp_path, network=network)
    result = runner.invoke(cli_main.app, ["surface", str(path), "--out", str(tmp_path / "out"), "--samples", "1"])
    assert result.exit_code == cli_main.EXIT_COMPUTE
    assert "exceeds link" in result.output


def test_maxband_single_intersection(tmp_path: Path) -> None:
    path = _scenario(tmp_path)
    result = runner.invoke(cli_main.app, ["maxband", str(path)])
    assert result.exit_code == 0, result.output
    assert "Cycle:" in result.output
    assert "M: []" in result.output
    assert "Offsets (s): [0.0]" in result.output


def test_maxband_rejects_unknown_flow_source(tmp_path: Path) -> None:
    path = _scenario(tmp_path)
    result = runner.invoke(cli_main.app, ["maxband", str(path), "--flows", "guess"])
    assert result.exit_code == cli_main.EXIT_CONFIG


def test_maxband_on_shipped_arterial() -> None:
    result = runner.invoke(cli_main.app, ["maxband", "scenarios/arterial.yaml", "--flows", "prior"])
    assert result.exit_code == 0, result.output
    assert "zeta_bar:" in result.output


def test_datamap_writes_family_grids(tmp_path: Path) -> None:
    path = _scenario(tmp_path)
    out = tmp_path / "out"
    result = runner.invoke(cli_main.app, ["datamap", str(path), "--out", str(out), "--points", "2"])
    assert result.exit_code == 0, result.output
    assert "3 families x 2^2" in result.output
    assert (out / "datamap.csv").exists()
    assert (out / "manifest.json").exists()


def test_datamap_needs_two_points(tmp_path: Path) -> None:
    path = _scenario(tmp_path)
    result = runner.invoke(cli_main.app, ["datamap", str(path), "--points", "1"])
    assert result.exit_code != 0


def test_equilibrium_reports_leader_choice(tmp_path: Path) -> None:
    path = _scenario(tmp_path)
    out = tmp_path / "out"
    result = runner.invoke(cli_main.app, ["equilibrium", str(path), "--out", str(out), "--samples", "2"])
    assert result.exit_code == 0, result.output
    assert "Leader choice d:" in result.output
    assert "Leader value:" in result.output
    data = json.loads((out / "equilibrium.json").read_text(encoding="utf-8"))
    assert len(data["regions"]) == 2
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["distortion"][0].startswith("MP 1")


def test_scenario_from_environment(tmp_path: Path) -> None:
    path = _scenario(tmp_path)
    result = runner.invoke(cli_main.app, ["maxband"], env={SCENARIO_PATH_ENV: str(path)})
    assert result.exit_code == 0, result.output
    assert "Cycle:" in result.output


def test_no_scenario_anywhere(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv(SCENARIO_PATH_ENV, raising=False)
    result = runner.invoke(cli_main.app, ["maxband"])
    assert result.exit_code == cli_main.EXIT_CONFIG
    assert SCENARIO_PATH_ENV in result.output


def test_equilibrium_is_reproducible_under_a_seed(tmp_path: Path) -> None:
    path = _scenario(tmp_path)
    args = ["--samples", "2", "--seed", "7"]
    first = runner.invoke(cli_main.app, ["equilibrium", str(path), "--out", str(tmp_path / "a"), *args])
    second = runner.invoke(
        cli_main.app, ["equilibrium", str(path), "--out", str(tmp_path / "b"), "--threads", "2", *args]
    )
    assert first.exit_code == 0 and second.exit_code == 0
    assert (tmp_path / "a" / "equilibrium.json").read_bytes() == (tmp_path / "b" / "equilibrium.json").read_bytes()


def test_datamap_is_reproducible(tmp_path: Path) -> None:
    path = _scenario(tmp_path)
    for name in ("a", "b"):
        result = runner.invoke(cli_main.app, ["datamap", str(path), "--out", str(tmp_path / name), "--points", "2"])
        assert result.exit_code == 0, result.output
    for name in ("datamap.csv", "datamap.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
