from __future__ import annotations

import logging
import math

import numpy as np

from privflow.errors import Oversaturated
from privflow.privacy.models import FoQDataset
from privflow.rng import SeedLike, as_generator

from .models import FundamentalDiagram, MovementConfig

logger = logging.getLogger(__name__)


def _join_times(x: np.ndarray, fd: FundamentalDiagram, cfg: MovementConfig, psi: float) -> np.ndarray:
    """Time each vehicle (by cumulative jam index x) meets the front of queue."""
    if cfg.case == "case1":
        return x / (fd.k_j * abs(psi))
    t_a = cfg.upstream_discharge_s
    x_a = fd.k_j * fd.w * t_a
    first = x / (fd.k_j * fd.w)
    second = t_a + (x - x_a) / (fd.k_j * abs(psi))
    return np.where(x <= x_a, first, second)


def queue_length_at(t: float, fd: FundamentalDiagram, cfg: MovementConfig) -> float:
    psi = fd.queue_slope(cfg.q)
    if cfg.case == "case1":
        return abs(psi) * t
    t_a = cfg.upstream_discharge_s
    if t <= t_a:
        return fd.w * t
    return fd.w * t_a + abs(psi) * (t - t_a)


def simulate_foq(
    fd: FundamentalDiagram,
    cfg: MovementConfig,
    seed: SeedLike,
    *,
    movement_id: str = "",
    owner_id: int = 0,
) -> FoQDataset:
    """FoQ points of connected vehicles over several cycles, folded onto one representative red phase."""
    if cfg.q >= fd.capacity:
        raise Oversaturated(
            f"movement {movement_id or '?'}: arrival flow {cfg.q:.4f} veh/s not below capacity {fd.capacity:.4f}"
        )
    queue = queue_length_at(cfg.red, fd, cfg)
    if cfg.link_length_m is not None and queue > cfg.link_length_m:
        raise Oversaturated(
            f"movement {movement_id or '?'}: queue {queue:.1f} m at red end exceeds link {cfg.link_length_m:.1f} m"
        )

    arrivals, thinning = as_generator(seed).spawn(2)
    psi = fd.queue_slope(cfg.q)
    per_cycle = int(math.ceil(fd.k_j * queue)) + 2

    times: list[np.ndarray] = []
    positions: list[np.ndarray] = []
    for _ in range(cfg.cycles):
        phase = arrivals.uniform(0.0, 1.0)
        jitter = arrivals.uniform(-0.5 * cfg.jitter, 0.5 * cfg.jitter, size=per_cycle)
        x = np.arange(per_cycle) + phase + jitter
        t = _join_times(x, fd, cfg, psi)
        keep = (t >= 0.0) & (t <= cfg.red)
        times.append(t[keep])
        positions.append(-x[keep] / fd.k_j)

    t = np.concatenate(times)
    h = np.concatenate(positions)
    if cfg.position_noise_m > 0:
        h = np.minimum(h + arrivals.normal(0.0, cfg.position_noise_m, size=h.size), 0.0)
    sampled = thinning.random(t.size) < cfg.penetration
    logger.debug("movement %s: %d of %d vehicles are sampled", movement_id, int(sampled.sum()), t.size)
    return FoQDataset(t=t[sampled], h=h[sampled], movement_id=movement_id, owner_id=owner_id)
