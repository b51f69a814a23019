from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Literal

import matplotlib

matplotlib.use("Agg")

import numpy as np
import pandas as pd
from matplotlib import rc_context
from matplotlib.figure import Figure

from privflow.manifest import atomic_write_json

from .datamap import DataUtilityMap
from .game import GameResult
from .surface import UtilitySurface

logger = logging.getLogger(__name__)

ExportFormat = Literal["csv", "json", "svg"]
ALL_FORMATS: tuple[ExportFormat, ...] = ("csv", "json", "svg")
SVG_SALT = "privflow"


def surface_frame(surface: UtilitySurface) -> pd.DataFrame:
    k = len(surface.axes)
    cells = np.asarray(surface.cells(), dtype=float).reshape(-1, k)
    columns: dict[str, object] = {f"eps_{i + 1}": cells[:, i] for i in range(k)}
    columns["u_ma"] = surface.u_ma
    w = np.asarray(surface.w_mp, dtype=float)
    u = np.asarray(surface.u_mp, dtype=float)
    s = np.asarray(surface.share, dtype=int)
    for i in range(k):
        columns[f"w_mp_{i + 1}"] = w[:, i]
    for i in range(k):
        columns[f"u_mp_{i + 1}"] = u[:, i]
    for i in range(k):
        columns[f"share_{i + 1}"] = s[:, i]
    columns["se_ma"] = surface.se_ma
    return pd.DataFrame(columns)


def datamap_frame(dmap: DataUtilityMap) -> pd.DataFrame:
    rows = [
        {"family": fam.family, "q_hat_vph": q_hat, "q_vph": q, "delay_s": fam.delay_s[i][j]}
        for fam in dmap.families
        for i, q_hat in enumerate(fam.q_hat_vph)
        for j, q in enumerate(fam.q_vph)
    ]
    return pd.DataFrame(rows, columns=["family", "q_hat_vph", "q_vph", "delay_s"])


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n", float_format="%.12g")
    return path


def heatmap_svg(
    values: np.ndarray,
    x: list[float],
    y: list[float],
    path: Path,
    *,
    xlabel: str,
    ylabel: str,
    title: str,
    colorbar: str,
) -> Path:
    """Static colored grid; rows follow y, columns follow x."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "path"}):
        fig = Figure(figsize=(6.0, 4.5))
        ax = fig.add_subplot(1, 1, 1)
        image = ax.imshow(np.atleast_2d(values), origin="lower", aspect="auto", cmap="viridis")
        ax.set_xticks(range(len(x)), [f"{v:g}" for v in x], rotation=45)
        ax.set_yticks(range(len(y)), [f"{v:g}" for v in y])
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        fig.colorbar(image, ax=ax, label=colorbar)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def _surface_slice(surface: UtilitySurface) -> tuple[np.ndarray, list[float], list[float], str]:
    grid = surface.grid("u_ma")
    if grid.ndim == 1:
        return grid[None, :], surface.axes[0], [0.0], "-"
    index = (slice(None), slice(None)) + tuple(len(a) - 1 for a in surface.axes[2:])
    return grid[index], surface.axes[1], surface.axes[0], f"eps of MP {surface.mp_ids[0]}"


def export_surface(surface: UtilitySurface, out_dir: Path, formats: Iterable[ExportFormat] = ALL_FORMATS) -> list[Path]:
    paths = []
    formats = set(formats)
    if "csv" in formats:
        paths.append(write_csv(surface_frame(surface), out_dir / "surface.csv"))
    if "json" in formats:
        paths.append(atomic_write_json(out_dir / "surface.json", surface.model_dump(mode="json")))
    if "svg" in formats:
        values, x, y, ylabel = _surface_slice(surface)
        xlabel = f"eps of MP {surface.mp_ids[1]}" if len(surface.axes) > 1 else f"eps of MP {surface.mp_ids[0]}"
        paths.append(
            heatmap_svg(
                values,
                x,
                y,
                out_dir / "surface.svg",
                xlabel=xlabel,
                ylabel=ylabel,
                title="MA utility (delay reduction)",
                colorbar="s/veh",
            )
        )
    return paths


def export_datamap(dmap: DataUtilityMap, out_dir: Path, formats: Iterable[ExportFormat] = ALL_FORMATS) -> list[Path]:
    paths = []
    formats = set(formats)
    if "csv" in formats:
        paths.append(write_csv(datamap_frame(dmap), out_dir / "datamap.csv"))
    if "json" in formats:
        paths.append(atomic_write_json(out_dir / "datamap.json", dmap.model_dump(mode="json")))
    if "svg" in formats:
        for fam in dmap.families:
            paths.append(
                heatmap_svg(
                    np.asarray(fam.delay_s),
                    fam.q_vph,
                    fam.q_hat_vph,
                    out_dir / f"datamap_{fam.family}.svg",
                    xlabel="true flow q (veh/h)",
                    ylabel="estimated flow q_hat (veh/h)",
                    title=f"Average delay, {fam.family} movements",
                    colorbar="s/veh",
                )
            )
    return paths


def export_game(result: GameResult, out_dir: Path) -> list[Path]:
    return [atomic_write_json(out_dir / "equilibrium.json", result.model_dump(mode="json"))]


def export_results(
    artifact: UtilitySurface | DataUtilityMap | GameResult,
    out_dir: Path,
    formats: Iterable[ExportFormat] = ALL_FORMATS,
) -> list[Path]:
    if isinstance(artifact, UtilitySurface):
        paths = export_surface(artifact, out_dir, formats)
    elif isinstance(artifact, DataUtilityMap):
        paths = export_datamap(artifact, out_dir, formats)
    elif isinstance(artifact, GameResult):
        paths = export_game(artifact, out_dir)
    else:
        raise TypeError(f"cannot export {type(artifact).__name__}")
    logger.info("wrote %s", ", ".join(p.name for p in paths))
    return paths
