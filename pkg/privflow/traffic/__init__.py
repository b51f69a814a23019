from .demand import estimate_demands, fuse_estimates, sample_true_demand, slope_to_flow
from .foq import simulate_foq
from .io import read_foq_csv, write_foq_csv
from .models import (
    DemandEstimate,
    FundamentalDiagram,
    MovementConfig,
    MovementEstimate,
    ObservedMovement,
    RegressionEstimate,
)
from .regression import fit_case1, fit_case2a, fit_case2b, fit_stats

__all__ = [
    "DemandEstimate",
    "FundamentalDiagram",
    "MovementConfig",
    "MovementEstimate",
    "ObservedMovement",
    "RegressionEstimate",
    "estimate_demands",
    "fit_case1",
    "fit_case2a",
    "fit_case2b",
    "fit_stats",
    "fuse_estimates",
    "read_foq_csv",
    "sample_true_demand",
    "simulate_foq",
    "slope_to_flow",
    "write_foq_csv",
]
