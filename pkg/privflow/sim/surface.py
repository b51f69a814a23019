from __future__ import annotations

import itertools
import logging
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from privflow.rng import replicate_seed

from .pipeline import PipelineContext, baseline_delay, collect_observations, pipeline_delay
from .scenario import Scenario

logger = logging.getLogger(__name__)

NOT_SHARING = 0.0


class UtilitySurface(BaseModel):
    """Monte Carlo utilities on the product grid of per-MP budgets; budget 0 means not sharing.

    Cell values are stored flat in C order over ``axes``.
    """

    model_config = ConfigDict(extra="forbid")

    mp_ids: list[int]
    axes: list[list[float]]
    u_ma: list[float]
    se_ma: list[float]
    w_mp: list[list[float]]
    u_mp: list[list[float]]
    share: list[list[bool]]
    flag_counts: list[dict[str, int]] = Field(default_factory=list)
    samples: int = Field(ge=1)
    base_seed: int = 0
    baseline_delay_s: float | None = None

    @model_validator(mode="after")
    def _check(self) -> UtilitySurface:
        n_cells = math.prod(len(axis) for axis in self.axes)
        for name in ("u_ma", "se_ma", "w_mp", "u_mp", "share"):
            if len(getattr(self, name)) != n_cells:
                raise ValueError(f"{name} needs {n_cells} cells")
        if any(se < 0 for se in self.se_ma):
            raise ValueError("standard errors must be non-negative")
        return self

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(axis) for axis in self.axes)

    def cells(self) -> list[tuple[float, ...]]:
        return list(itertools.product(*self.axes))

    def grid(self, name: str = "u_ma") -> np.ndarray:
        values = np.asarray(getattr(self, name), dtype=float)
        if values.ndim == 1:
            return values.reshape(self.shape)
        return values.reshape(self.shape + (values.shape[1],))


def surface_axes(eps_grid: Sequence[float], n_mps: int) -> list[list[float]]:
    return [[NOT_SHARING, *(float(e) for e in eps_grid)] for _ in range(n_mps)]


def cell_seed(base_seed: int, cell_index: int, sample_index: int, samples: int, common: bool) -> int:
    if common:
        return replicate_seed(base_seed, sample_index)
    return replicate_seed(base_seed, cell_index * samples + sample_index)


def _sample_row(
    ctx: PipelineContext,
    cells: list[tuple[float, ...]],
    sample_index: int,
) -> list[tuple[float, list[str]]]:
    mc = ctx.scenario.mc
    shared_obs = None
    row = []
    for c, eps in enumerate(cells):
        seed = cell_seed(mc.seed, c, sample_index, mc.samples, mc.common_random_numbers)
        a = [e > NOT_SHARING for e in eps]
        observations = None
        if any(a):
            if mc.common_random_numbers:
                if shared_obs is None:
                    shared_obs = collect_observations(ctx, seed)
                observations = shared_obs
            else:
                observations = collect_observations(ctx, seed)
        outcome = pipeline_delay(ctx, a, list(eps), seed, observations=observations)
        row.append((outcome.improvement_s, outcome.flags))
    return row


def _mean_and_se(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def utility_surface(scn: Scenario, *, threads: int | None = None) -> UtilitySurface:
    ctx = PipelineContext.from_scenario(scn)
    mc = scn.mc
    axes = surface_axes(scn.game.eps_grid, scn.n_mps)
    cells = list(itertools.product(*axes))
    workers = threads or mc.threads or os.cpu_count() or 1
    logger.info("utility surface: %d cells x %d samples on %d threads", len(cells), mc.samples, workers)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda i: _sample_row(ctx, cells, i), range(mc.samples)))

    u_ma, se_ma, w_mp, u_mp, share, flag_counts = [], [], [], [], [], []
    for c, eps in enumerate(cells):
        mean, se = _mean_and_se([rows[i][c][0] for i in range(mc.samples)])
        counts = Counter(flag for i in range(mc.samples) for flag in rows[i][c][1])
        a = [e > NOT_SHARING for e in eps]
        welfare = [mp.kappa * mean for mp in scn.mps]
        u_ma.append(mean)
        se_ma.append(se)
        w_mp.append(welfare)
        u_mp.append([w - mp.beta * e * share_k for w, mp, e, share_k in zip(welfare, scn.mps, eps, a)])
        share.append(a)
        flag_counts.append(dict(sorted(counts.items())))
    logger.info("utility surface done; max MA utility %.4f s/veh", max(u_ma))
    return UtilitySurface(
        mp_ids=[mp.id for mp in scn.mps],
        axes=axes,
        u_ma=u_ma,
        se_ma=se_ma,
        w_mp=w_mp,
        u_mp=u_mp,
        share=share,
        flag_counts=flag_counts,
        samples=mc.samples,
        base_seed=mc.seed,
        baseline_delay_s=baseline_delay(ctx),
    )
