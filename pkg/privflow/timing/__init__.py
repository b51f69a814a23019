from .delay import evaluate_delay, movement_delay, progression_factor
from .maxband import build_band_problem, loop_integer_ranges, maxband_solve, offsets_from_band
from .models import (
    ArterialGeometry,
    BandProblem,
    BandSolution,
    Intersection,
    SignalPlan,
    TimedMovement,
    TimingSettings,
)
from .policy import PolicyOutcome, signal_policy
from .simplex import LinearProgramResult, linprog_simplex
from .webster import flow_ratios, webster_cycle, webster_splits

__all__ = [
    "ArterialGeometry",
    "BandProblem",
    "BandSolution",
    "Intersection",
    "LinearProgramResult",
    "PolicyOutcome",
    "SignalPlan",
    "TimedMovement",
    "TimingSettings",
    "build_band_problem",
    "evaluate_delay",
    "flow_ratios",
    "linprog_simplex",
    "loop_integer_ranges",
    "maxband_solve",
    "movement_delay",
    "offsets_from_band",
    "progression_factor",
    "signal_policy",
    "webster_cycle",
    "webster_splits",
]
