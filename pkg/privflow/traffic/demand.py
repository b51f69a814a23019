from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from privflow.errors import DegenerateStats, EmptyInput, InsufficientData, NoData, SingularDesign, SlopeOutOfRange
from privflow.privacy.mechanism import slope_distribution
from privflow.privacy.models import FoQDataset, SharedRelease
from privflow.rng import SeedLike, as_generator

from .models import DemandEstimate, FundamentalDiagram, MovementEstimate, ObservedMovement, RegressionEstimate
from .regression import fit_case1, fit_case2b

logger = logging.getLogger(__name__)


def fuse_estimates(estimates: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Precision-weighted combination of independent Gaussian estimates."""
    if not estimates:
        raise EmptyInput("no estimates to fuse")
    exact = [mean for mean, var in estimates if var <= 0]
    if exact:
        return math.fsum(exact) / len(exact), 0.0
    precision = math.fsum(1.0 / var for _, var in estimates)
    variance = 1.0 / precision
    mean = variance * math.fsum(mean / var for mean, var in estimates)
    return mean, variance


def slope_to_flow(psi: float, fd: FundamentalDiagram) -> float:
    if not -fd.w <= psi < 0:
        raise SlopeOutOfRange(f"queue slope {psi:g} m/s outside [-{fd.w:g}, 0)")
    q = psi * fd.v_f * fd.k_j / (psi - fd.v_f)
    return min(max(q, 0.0), fd.capacity)


def flow_slope_derivative(psi: float, fd: FundamentalDiagram) -> float:
    """d q / d psi of the slope-to-flow map."""
    return -fd.v_f**2 * fd.k_j / (psi - fd.v_f) ** 2


def _flow_posterior(mean: float, variance: float, fd: FundamentalDiagram) -> tuple[float, float]:
    if mean >= 0:
        psi = -1e-12
    else:
        psi = max(mean, -fd.w)
    q = slope_to_flow(psi, fd)
    return q, flow_slope_derivative(psi, fd) ** 2 * variance


def _fit(points: FoQDataset, movement: ObservedMovement) -> RegressionEstimate:
    if movement.case == "case2":
        return fit_case2b(points.select(points.t > movement.upstream_discharge_s))
    return fit_case1(points)


def _slope_estimate(item: FoQDataset | SharedRelease, movement: ObservedMovement) -> tuple[float, float] | None:
    try:
        if isinstance(item, FoQDataset):
            fit = _fit(item, movement)
            return fit.slope, fit.slope_variance
        if item.points is None:
            return None
        fit = _fit(item.points, movement)
        privacy = slope_distribution(item.stats, item.stats.lam_t, item.noise)
        return fit.slope, fit.slope_variance + privacy.variance
    except (InsufficientData, SingularDesign, DegenerateStats) as exc:
        logger.debug("movement %s: dropping one source (%s)", movement.movement_id, exc)
        return None


def estimate_demands(
    shared: Sequence[FoQDataset | SharedRelease],
    movements: Sequence[ObservedMovement],
    *,
    use_prior: bool = True,
) -> DemandEstimate:
    result = DemandEstimate()
    for movement in movements:
        sources = [s for s in shared if s.movement_id == movement.movement_id]
        slopes = [est for est in (_slope_estimate(s, movement) for s in sources) if est is not None]
        fd = movement.fd
        if slopes:
            mean, variance = fuse_estimates(slopes)
            flow, flow_variance = _flow_posterior(mean, variance, fd)
            result.movements[movement.movement_id] = MovementEstimate(
                movement_id=movement.movement_id,
                slope_mean=mean,
                slope_variance=variance,
                flow=flow,
                flow_variance=flow_variance,
                capacity=fd.capacity,
                n_sources=len(slopes),
            )
            continue
        if not use_prior:
            raise NoData(f"movement {movement.movement_id} has no usable shared data")
        logger.debug("movement %s falls back to the prior flow", movement.movement_id)
        result.movements[movement.movement_id] = MovementEstimate(
            movement_id=movement.movement_id,
            flow=min(movement.prior_flow, fd.capacity),
            flow_variance=movement.prior_flow_sd**2,
            capacity=fd.capacity,
            source="prior",
        )
    return result


def sample_true_demand(est: DemandEstimate, n_samples: int, seed: SeedLike) -> list[dict[str, float]]:
    rng = as_generator(seed)
    ids = sorted(est.movements)
    means = np.array([est.movements[m].flow for m in ids])
    sds = np.sqrt(np.array([est.movements[m].flow_variance for m in ids]))
    caps = np.array([est.movements[m].capacity for m in ids])
    draws = np.clip(means + sds * rng.standard_normal((n_samples, len(ids))), 0.0, caps)
    return [dict(zip(ids, (float(v) for v in row))) for row in draws]
