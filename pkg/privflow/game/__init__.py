from .followers import (
    collaboration_gain,
    lower_stage_equilibrium,
    quality_to_budget_floor,
    sufficient_condition_check,
)
from .models import (
    ActionProfile,
    DistortionProfile,
    FollowerSpec,
    LeaderEvaluation,
    MixedProfile,
    SneResult,
    ValueTable,
)
from .sne import solve_sne
from .upper_stage import decreasing_differences_check, mixed_ne, pure_ne, regret, upper_stage_value_table

__all__ = [
    "ActionProfile",
    "DistortionProfile",
    "FollowerSpec",
    "LeaderEvaluation",
    "MixedProfile",
    "SneResult",
    "ValueTable",
    "collaboration_gain",
    "decreasing_differences_check",
    "lower_stage_equilibrium",
    "mixed_ne",
    "pure_ne",
    "quality_to_budget_floor",
    "regret",
    "solve_sne",
    "sufficient_condition_check",
    "upper_stage_value_table",
]
