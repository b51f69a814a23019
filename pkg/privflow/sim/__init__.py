from .datamap import DataUtilityFamily, DataUtilityMap, data_utility_map
from .export import export_results
from .game import GameResult, RegionRow, distortion_profiles, run_game
from .pipeline import (
    PipelineContext,
    PipelineOutcome,
    baseline_delay,
    collect_observations,
    oracle_delay,
    pipeline_delay,
)
from .scenario import Scenario, build_scenario
from .surface import UtilitySurface, utility_surface

__all__ = [
    "DataUtilityFamily",
    "DataUtilityMap",
    "GameResult",
    "PipelineContext",
    "PipelineOutcome",
    "RegionRow",
    "Scenario",
    "UtilitySurface",
    "baseline_delay",
    "build_scenario",
    "collect_observations",
    "data_utility_map",
    "distortion_profiles",
    "export_results",
    "oracle_delay",
    "pipeline_delay",
    "run_game",
    "utility_surface",
]
