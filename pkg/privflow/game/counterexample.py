"""Three-follower game with decreasing differences and no pure equilibrium."""
from __future__ import annotations

import math

import numpy as np

from .models import FollowerSpec, ValueTable
from .upper_stage import upper_stage_value_table

OFFSET = 1.0099
COSTS = (0.161, 0.1545, 0.1102)
INTERACTIONS = {
    (0, 1): 1.0622,
    (0, 2): 0.0979,
    (1, 0): 0.0521,
    (1, 2): 0.5048,
    (2, 0): 0.9145,
    (2, 1): 0.2694,
}


def _utility(k: int):
    def utility(z: np.ndarray) -> float:
        value = math.log(float(np.sum(z)) + OFFSET) - COSTS[k] * z[k]
        for (i, j), gamma in INTERACTIONS.items():
            if i == k:
                value -= gamma * z[k] * z[j]
        return float(value)

    return utility


def counterexample_followers() -> list[FollowerSpec]:
    """Binary participation: a floor of 1 pins every sharer to z = 1."""
    return [FollowerSpec(id=k + 1, utility=_utility(k), floor=1.0) for k in range(3)]


def counterexample_table() -> ValueTable:
    return upper_stage_value_table(counterexample_followers(), concavity_check=False)
