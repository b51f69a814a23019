from .accounting import adjacency_chain, traj_to_count_budget
from .mechanism import (
    gaussian_sigma,
    l2_sensitivity,
    noise_scales,
    perturb_stats,
    query_stats,
    reconstruct_foq,
    release_foq,
    slope_distribution,
)
from .models import (
    FoQDataset,
    FoQPoint,
    NoiseScales,
    PrivacyBudget,
    QueryStats,
    SensitivityWeights,
    SharedRelease,
    SlopeDistribution,
)

__all__ = [
    "FoQDataset",
    "FoQPoint",
    "NoiseScales",
    "PrivacyBudget",
    "QueryStats",
    "SensitivityWeights",
    "SharedRelease",
    "SlopeDistribution",
    "adjacency_chain",
    "gaussian_sigma",
    "l2_sensitivity",
    "noise_scales",
    "perturb_stats",
    "query_stats",
    "reconstruct_foq",
    "release_foq",
    "slope_distribution",
    "traj_to_count_budget",
]
