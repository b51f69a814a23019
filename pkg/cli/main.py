from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable, TypeVar

import typer

from privflow.config import apply_overrides, load_config, resolve_scenario_path
from privflow.errors import BudgetOutOfRange, PrivflowError, ScenarioError
from privflow.game.counterexample import counterexample_table
from privflow.game.upper_stage import decreasing_differences_check, mixed_ne, pure_ne
from privflow.manifest import ManifestRecorder
from privflow.privacy.accounting import traj_to_count_budget
from privflow.privacy.mechanism import gaussian_sigma, l2_sensitivity, noise_scales
from privflow.privacy.models import PrivacyBudget, SensitivityWeights
from privflow.sim.datamap import data_utility_map
from privflow.sim.export import export_results
from privflow.sim.game import run_game
from privflow.sim.scenario import Scenario, build_scenario
from privflow.sim.surface import utility_surface
from privflow.timing.policy import signal_policy

app = typer.Typer(add_completion=False)

EXIT_CONFIG = 2
EXIT_COMPUTE = 3

T = TypeVar("T")

SCENARIO_ARG = typer.Argument(None, help="Scenario YAML (defaults to $PRIVFLOW_SCENARIO_PATH)")
OUT_OPT = typer.Option(Path("outputs"), "--out", help="Directory for the emitted files")
SEED_OPT = typer.Option(None, "--seed", help="Base seed override")
SAMPLES_OPT = typer.Option(None, "--samples", help="Monte Carlo samples per cell")
GRID_OPT = typer.Option(None, "--grid", help="Comma-separated privacy budgets, e.g. 0.1,0.5,0.9")
THREADS_OPT = typer.Option(None, "--threads", help="Worker threads (default: available cores)")


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress at INFO level")) -> None:
    """Stackelberg data-collaboration simulator for arterial signal timing."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _guard(action: Callable[[], T]) -> T:
    """Run a command body, mapping domain errors to exit codes."""
    try:
        return action()
    except (ScenarioError, BudgetOutOfRange) as exc:
        typer.echo(f"Error: {exc}", err=True)
        raise typer.Exit(code=EXIT_CONFIG) from exc
    except PrivflowError as exc:
        typer.echo(f"Error: {exc}", err=True)
        raise typer.Exit(code=EXIT_COMPUTE) from exc


def _parse_grid(raw: str | None) -> list[float] | None:
    if raw is None:
        return None
    try:
        values = [float(part) for part in raw.split(",") if part.strip()]
    except ValueError as exc:
        raise ScenarioError(f"Invalid --grid value {raw!r}: expected comma-separated numbers") from exc
    if not values:
        raise ScenarioError("--grid needs at least one value")
    return values


def _load(
    scenario: Path | None,
    *,
    seed: int | None = None,
    samples: int | None = None,
    grid: str | None = None,
    threads: int | None = None,
) -> tuple[Path, Scenario]:
    path = resolve_scenario_path(scenario)
    cfg = load_config(path)
    cfg = apply_overrides(cfg, seed=seed, samples=samples, eps_grid=_parse_grid(grid), threads=threads)
    return path, build_scenario(cfg)


@app.command()
def surface(
    scenario: Path | None = SCENARIO_ARG,
    out: Path = OUT_OPT,
    seed: int | None = SEED_OPT,
    samples: int | None = SAMPLES_OPT,
    grid: str | None = GRID_OPT,
    threads: int | None = THREADS_OPT,
) -> None:
    """Monte Carlo utility surface over the privacy-budget grid."""

    def body() -> None:
        path, scn = _load(scenario, seed=seed, samples=samples, grid=grid, threads=threads)
        recorder = ManifestRecorder("surface", out, path, scn.mc.seed)
        result = utility_surface(scn, threads=threads)
        recorder.add(*export_results(result, out))
        manifest = recorder.finish()
        typer.echo(f"Surface: {len(result.u_ma)} cells, {result.samples} samples -> {out}")
        typer.echo(f"Manifest: {manifest}")

    _guard(body)


@app.command()
def equilibrium(
    scenario: Path | None = SCENARIO_ARG,
    out: Path = OUT_OPT,
    seed: int | None = SEED_OPT,
    samples: int | None = SAMPLES_OPT,
    grid: str | None = GRID_OPT,
    threads: int | None = THREADS_OPT,
) -> None:
    """Leader-optimal quality threshold and the collaboration region of every grid point."""

    def body() -> None:
        path, scn = _load(scenario, seed=seed, samples=samples, grid=grid, threads=threads)
        recorder = ManifestRecorder("equilibrium", out, path, scn.mc.seed)
        result = run_game(scn, threads=threads)
        recorder.manifest.distortion = result.distortion
        recorder.add(*export_results(result, out))
        recorder.finish()
        sne = result.sne
        typer.echo(f"Leader choice d: {[round(x, 6) for x in sne.leader_choice]}")
        if sne.follower_profile is not None:
            typer.echo(f"Participation: {[int(a) for a in sne.follower_profile.a]}")
            typer.echo(f"Budgets: {[round(z, 6) for z in sne.follower_profile.z]}")
        elif sne.mixed_profile is not None:
            typer.echo(f"Mixed participation: {[round(p, 6) for p in sne.mixed_profile.probs]}")
        typer.echo(f"Leader value: {sne.leader_value:.6f} s/veh")
        for row in result.regions:
            typer.echo(f"  d={[round(x, 6) for x in row.d]} {row.classification}")

    _guard(body)


@app.command()
def counterexample() -> None:
    """Payoff table of the three-follower game without a pure equilibrium."""
    table = counterexample_table()
    typer.echo("a          V1      V2      V3")
    for a in table.profiles():
        values = "  ".join(f"{v:6.2f}" for v in table.values[a])
        typer.echo(f"{''.join(str(x) for x in a):<8} {values}")
    equilibria = pure_ne(table)
    ok, worst = decreasing_differences_check(table)
    mixed = mixed_ne(table)
    typer.echo(f"Pure NE: {equilibria if equilibria else 'none'}")
    typer.echo(f"Decreasing differences: {ok} (worst excess {worst:.3g})")
    typer.echo(f"Mixed NE: p={[round(p, 6) for p in mixed.probs]} regret={mixed.regret:.2e}")


@app.command()
def dp(
    eps: float = typer.Option(..., "--eps", help="Trajectory-level epsilon in (0, 1)"),
    delta: float = typer.Option(..., "--delta", help="Trajectory-level delta in (0, 1)"),
    b: int = typer.Option(1, "--b", help="Points a trajectory contributes"),
    t_max: float = typer.Option(120.0, "--t-max", help="Public time bound, s"),
    h_max: float = typer.Option(300.0, "--h-max", help="Public position bound, m"),
    rho_t: float | None = typer.Option(None, "--rho-t"),
    rho_th: float | None = typer.Option(None, "--rho-th"),
    rho_h: float | None = typer.Option(None, "--rho-h"),
    rho_n: float | None = typer.Option(None, "--rho-n"),
    intercept: bool = typer.Option(False, "--intercept", help="Include the sums needed for an intercept fit"),
    statement_bound: bool = typer.Option(False, "--statement-bound", help="Sum delta terms up to b"),
) -> None:
    """Sensitivity, Gaussian noise scale and count-level budget for one privacy setting."""

    def body() -> None:
        pb = PrivacyBudget(eps=eps, delta=delta)
        weights = SensitivityWeights.balanced(t_max, h_max)
        update = {
            name: value
            for name, value in (("rho_t", rho_t), ("rho_th", rho_th), ("rho_h", rho_h), ("rho_n", rho_n))
            if value is not None
        }
        if update:
            weights = weights.model_copy(update=update)
        delta_f = l2_sensitivity(weights, intercept=intercept)
        sigma = gaussian_sigma(delta_f, pb)
        typer.echo(f"Sensitivity: {delta_f:.6g}")
        typer.echo(f"Sigma: {sigma:.6g}")
        for name, value in noise_scales(weights, pb, intercept=intercept).model_dump(exclude_none=True).items():
            typer.echo(f"  sigma[{name}]: {value:.6g}")
        try:
            count_eps, count_delta = traj_to_count_budget(eps, delta, b, statement_bound=statement_bound)
        except ValueError as exc:
            raise BudgetOutOfRange(str(exc)) from exc
        typer.echo(f"Count-level budget (b={b}): eps={count_eps:.6g} delta={count_delta:.6g}")

    _guard(body)


@app.command()
def maxband(
    scenario: Path | None = SCENARIO_ARG,
    flows: str = typer.Option("truth", "--flows", help="Flows to time the arterial for: truth|prior"),
) -> None:
    """Webster timing plus MAXBAND bandwidths and offsets for the scenario arterial."""

    def body() -> None:
        _, scn = _load(scenario)
        if flows not in ("truth", "prior"):
            raise ScenarioError(f"--flows must be truth or prior, got {flows!r}")
        q = scn.true_flows() if flows == "truth" else scn.prior_flows()
        decision = signal_policy(q, scn.geometry(), scn.timing_settings())
        band = decision.band
        typer.echo(f"Cycle: {decision.plan.cycle_s:.3f} s")
        typer.echo(f"b: {band.b:.6f}  b_bar: {band.b_bar:.6f}  objective: {band.objective:.6f}")
        typer.echo(f"zeta: {[round(x, 6) for x in band.zeta]}")
        typer.echo(f"zeta_bar: {[round(x, 6) for x in band.zeta_bar]}")
        typer.echo(f"M: {band.m}")
        typer.echo(f"Offsets (s): {[round(x, 3) for x in decision.plan.offsets_s]}")
        if not band.feasible:
            typer.echo("Zero band: no loop-integer combination is feasible")

    _guard(body)


@app.command()
def datamap(
    scenario: Path | None = SCENARIO_ARG,
    out: Path = OUT_OPT,
    points: int = typer.Option(9, "--points", min=2, help="Grid points per flow axis"),
) -> None:
    """Delay for every (estimated, true) flow pair of each movement family."""

    def body() -> None:
        path, scn = _load(scenario)
        recorder = ManifestRecorder("datamap", out, path, scn.mc.seed)
        result = data_utility_map(scn, points=points)
        recorder.add(*export_results(result, out))
        recorder.finish()
        typer.echo(f"Data-utility map: {len(result.families)} families x {points}^2 -> {out}")

    _guard(body)


if __name__ == "__main__":
    app()
