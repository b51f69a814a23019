from __future__ import annotations

import numpy as np

from privflow.errors import InsufficientData, SingularDesign
from privflow.privacy.models import FoQDataset, QueryStats

from .models import RegressionEstimate


def fit_stats(stats: QueryStats) -> RegressionEstimate:
    """Least-squares fit from sufficient statistics: through the origin, or with an intercept."""
    n = int(round(stats.n))
    if not stats.has_intercept:
        if n < 2 or stats.lam_t <= 0:
            raise InsufficientData(f"need at least 2 points with positive time spread, got n={stats.n:g}")
        slope = stats.lam_th / stats.lam_t
        residual = max((stats.lam_h - stats.lam_th**2 / stats.lam_t) / (stats.n - 1.0), 0.0)
        return RegressionEstimate(
            slope=slope,
            residual_variance=residual,
            slope_variance=residual / stats.lam_t,
            n=n,
        )

    if n < 3:
        raise InsufficientData(f"need at least 3 points for slope and intercept, got n={stats.n:g}")
    spread = stats.lam_t - stats.sum_t**2 / stats.n
    if spread <= 0:
        raise SingularDesign("all observation times coincide")
    slope = (stats.lam_th - stats.sum_t * stats.sum_h / stats.n) / spread
    intercept = (stats.sum_h - slope * stats.sum_t) / stats.n
    rss = stats.lam_h - slope * stats.lam_th - intercept * stats.sum_h
    residual = max(rss / (stats.n - 2.0), 0.0)
    return RegressionEstimate(
        slope=slope,
        intercept=intercept,
        residual_variance=residual,
        slope_variance=residual / spread,
        intercept_variance=residual * stats.lam_t / (stats.n * spread),
        n=n,
    )


def fit_case1(ds: FoQDataset) -> RegressionEstimate:
    """Queue front through the origin: h = psi * t."""
    if len(ds) < 2:
        raise InsufficientData(f"case 1 fit needs at least 2 points, got {len(ds)}")
    t, h = ds.t, ds.h
    lam_t = float(np.dot(t, t))
    if lam_t <= 0:
        raise InsufficientData("case 1 fit needs a point with t > 0")
    return fit_stats(QueryStats(lam_t=lam_t, lam_th=float(np.dot(t, h)), lam_h=float(np.dot(h, h)), n=len(ds)))


def fit_case2a(ds: FoQDataset, w: float) -> RegressionEstimate:
    """Intercept of the first segment when its slope w is known."""
    n = len(ds)
    if n < 2:
        raise InsufficientData(f"case 2a fit needs at least 2 points, got {n}")
    residual = ds.h - w * ds.t
    intercept = float(np.mean(residual))
    variance = float(np.sum((residual - intercept) ** 2) / (n - 1))
    return RegressionEstimate(
        slope=w,
        intercept=intercept,
        residual_variance=variance,
        slope_variance=0.0,
        intercept_variance=variance / n,
        n=n,
    )


def fit_case2b(ds: FoQDataset) -> RegressionEstimate:
    """Slope and intercept of the second segment by ordinary least squares."""
    n = len(ds)
    if n < 3:
        raise InsufficientData(f"case 2b fit needs at least 3 points, got {n}")
    design = np.column_stack([ds.t, np.ones(n)])
    if np.linalg.matrix_rank(design) < 2:
        raise SingularDesign("all observation times coincide")
    coef, *_ = np.linalg.lstsq(design, ds.h, rcond=None)
    residual = ds.h - design @ coef
    variance = float(residual @ residual / (n - 2))
    cov = variance * np.linalg.inv(design.T @ design)
    return RegressionEstimate(
        slope=float(coef[0]),
        intercept=float(coef[1]),
        residual_variance=variance,
        slope_variance=float(cov[0, 0]),
        intercept_variance=float(cov[1, 1]),
        n=n,
    )
