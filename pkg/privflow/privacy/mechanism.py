from __future__ import annotations

import logging
import math

import numpy as np

from privflow.errors import BudgetOutOfRange, DegenerateStats, OutOfBounds
from privflow.rng import SeedLike, as_generator

from .models import (
    FoQDataset,
    NoiseScales,
    PrivacyBudget,
    QueryStats,
    SensitivityWeights,
    SharedRelease,
    SlopeDistribution,
)

logger = logging.getLogger(__name__)

SYNTHETIC_COUNT_FACTOR = 10

FLAG_COUNT_CLAMPED = "count_clamped"
FLAG_NEGATIVE_VARIANCE = "negative_variance"
FLAG_DEGENERATE_STATS = "degenerate_stats"
FLAG_CAUCHY_SCHWARZ = "cauchy_schwarz_violated"


def query_stats(
    ds: FoQDataset,
    w: SensitivityWeights | None = None,
    *,
    intercept: bool = False,
) -> QueryStats:
    if w is not None and len(ds):
        bad = np.flatnonzero((ds.t > w.t_max) | (np.abs(ds.h) > w.h_max))
        if bad.size:
            i = int(bad[0])
            raise OutOfBounds(
                f"point {i} (t={ds.t[i]:g}, h={ds.h[i]:g}) of movement {ds.movement_id or '?'} "
                f"outside t_max={w.t_max:g}, h_max={w.h_max:g}"
            )
    stats = QueryStats(
        lam_t=float(np.dot(ds.t, ds.t)),
        lam_th=float(np.dot(ds.t, ds.h)),
        lam_h=float(np.dot(ds.h, ds.h)),
        n=float(len(ds)),
    )
    if intercept:
        stats.sum_t = float(np.sum(ds.t))
        stats.sum_h = float(np.sum(ds.h))
    return stats


def l2_sensitivity(w: SensitivityWeights, *, intercept: bool = False) -> float:
    terms = w.component_terms(intercept)
    return math.sqrt(math.fsum((delta * rho) ** 2 for delta, rho in terms.values()))


def gaussian_sigma(delta_f: float, pb: PrivacyBudget) -> float:
    if not 0.0 < pb.eps < 1.0 or not 0.0 < pb.delta < 1.0:
        raise BudgetOutOfRange(f"budget ({pb.eps}, {pb.delta}) outside (0, 1)")
    if delta_f <= 0:
        raise ValueError(f"sensitivity must be positive, got {delta_f}")
    return delta_f * math.sqrt(2.0 * math.log(1.25 / pb.delta)) / pb.eps


def noise_scales(w: SensitivityWeights, pb: PrivacyBudget, *, intercept: bool = False) -> NoiseScales:
    """Per-component noise sd: the Gaussian scale split by each weight's share of the weight norm."""
    terms = w.component_terms(intercept)
    sigma_f = gaussian_sigma(l2_sensitivity(w, intercept=intercept), pb)
    norm = math.sqrt(math.fsum(rho**2 for _, rho in terms.values()))
    return NoiseScales(**{name: sigma_f * rho / norm for name, (_, rho) in terms.items()})


def perturb_stats(stats: QueryStats, w: SensitivityWeights, pb: PrivacyBudget, seed: SeedLike) -> QueryStats:
    rng = as_generator(seed)
    scales = noise_scales(w, pb, intercept=stats.has_intercept)
    names = ["lam_t", "lam_th", "lam_h", "n"] + (["sum_t", "sum_h"] if stats.has_intercept else [])
    draws = rng.standard_normal(len(names))
    values = stats.model_dump()
    for name, z in zip(names, draws):
        values[name] = values[name] + float(getattr(scales, name)) * float(z)
    return QueryStats(**values)


def _intercept_fit(stats: QueryStats) -> tuple[float, float, float]:
    """Slope, intercept and centred time spread from intercept statistics."""
    n = stats.n
    if n <= 0:
        raise DegenerateStats(f"released count {n:g} not positive")
    spread = stats.lam_t - stats.sum_t**2 / n
    if spread <= 0:
        raise DegenerateStats(f"centred time spread {spread:g} not positive (n={n:g})")
    slope = (stats.lam_th - stats.sum_t * stats.sum_h / n) / spread
    intercept = (stats.sum_h - slope * stats.sum_t) / n
    return slope, intercept, spread


def slope_distribution(
    perturbed: QueryStats,
    unperturbed_reference_lam_t: float,
    noise: NoiseScales,
) -> SlopeDistribution:
    if perturbed.lam_t <= 0 or unperturbed_reference_lam_t <= 0:
        raise DegenerateStats(f"lam_t={perturbed.lam_t:g} not positive; budget too small for this sample")
    if not perturbed.has_intercept:
        mean = perturbed.lam_th / perturbed.lam_t
        variance = (noise.lam_th**2 + mean**2 * noise.lam_t**2) / unperturbed_reference_lam_t**2
        return SlopeDistribution(mean=mean, variance=variance)

    slope, _, spread = _intercept_fit(perturbed)
    n, st, sh = perturbed.n, perturbed.sum_t, perturbed.sum_h
    gradient = {
        "lam_th": 1.0 / spread,
        "lam_t": -slope / spread,
        "sum_h": -st / (n * spread),
        "sum_t": (-sh / n + 2.0 * slope * st / n) / spread,
        "n": (st * sh - slope * st**2) / (n**2 * spread),
    }
    variance = math.fsum((g * float(getattr(noise, name) or 0.0)) ** 2 for name, g in gradient.items())
    return SlopeDistribution(mean=slope, variance=variance)


def reconstruct_foq(
    perturbed: QueryStats,
    count_hint: int,
    time_support: tuple[float, float],
    seed: SeedLike,
    *,
    h_max: float = 300.0,
    movement_id: str = "",
    owner_id: int = 0,
) -> FoQDataset:
    """Synthetic FoQ points drawn from the linear model implied by released statistics only."""
    if count_hint < 1:
        raise ValueError(f"count hint must be positive, got {count_hint}")
    rng = as_generator(seed)
    flags: list[str] = []
    min_count = 3 if perturbed.has_intercept else 2
    n_tilde = perturbed.n
    if n_tilde < min_count:
        flags.append(FLAG_COUNT_CLAMPED)
        n_tilde = float(min_count)

    if perturbed.has_intercept:
        stats = perturbed.model_copy(update={"n": n_tilde})
        slope, intercept, _ = _intercept_fit(stats)
        rss = (
            stats.lam_h
            - 2.0 * slope * stats.lam_th
            - 2.0 * intercept * stats.sum_h
            + slope**2 * stats.lam_t
            + 2.0 * slope * intercept * stats.sum_t
            + n_tilde * intercept**2
        )
        variance = rss / (n_tilde - 2.0)
    else:
        if perturbed.lam_t <= 0:
            raise DegenerateStats(f"lam_t={perturbed.lam_t:g} not positive; budget too small for this sample")
        slope, intercept = perturbed.lam_th / perturbed.lam_t, 0.0
        variance = (perturbed.lam_h - perturbed.lam_th**2 / perturbed.lam_t) / (n_tilde - 1.0)
    if variance < 0:
        flags.append(FLAG_NEGATIVE_VARIANCE)
        variance = 0.0
    if not perturbed.satisfies_cauchy_schwarz():
        flags.append(FLAG_CAUCHY_SCHWARZ)

    count = int(min(max(round(n_tilde), min_count), SYNTHETIC_COUNT_FACTOR * count_hint))
    t_lo, t_hi = time_support
    t = rng.uniform(t_lo, t_hi, size=count)
    noise = rng.standard_normal(count) * math.sqrt(variance)
    h = np.clip(slope * t + intercept + noise, -h_max, 0.0)
    if flags:
        logger.debug("reconstruction of %s flagged %s", movement_id, flags)
    return FoQDataset(t=t, h=h, movement_id=movement_id, owner_id=owner_id, flags=tuple(flags))


def release_foq(
    ds: FoQDataset,
    w: SensitivityWeights,
    pb: PrivacyBudget,
    seed: SeedLike,
    time_support: tuple[float, float],
    *,
    intercept: bool = False,
) -> SharedRelease:
    """Query, perturb and reconstruct: the only path raw points take out of an owner."""
    rng = as_generator(seed)
    stats = query_stats(ds, w, intercept=intercept)
    perturbed = perturb_stats(stats, w, pb, rng)
    release = SharedRelease(
        owner_id=ds.owner_id,
        movement_id=ds.movement_id,
        stats=perturbed,
        noise=noise_scales(w, pb, intercept=intercept),
    )
    try:
        release.points = reconstruct_foq(
            perturbed,
            max(len(ds), 1),
            time_support,
            rng,
            h_max=w.h_max,
            movement_id=ds.movement_id,
            owner_id=ds.owner_id,
        )
        release.flags.extend(release.points.flags)
    except DegenerateStats as exc:
        logger.debug("release of %s/%s degenerate: %s", ds.owner_id, ds.movement_id, exc)
        release.flags.append(FLAG_DEGENERATE_STATS)
    return release
