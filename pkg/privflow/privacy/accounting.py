from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .models import FoQDataset


def traj_to_count_budget(eps: float, delta: float, b: int, *, statement_bound: bool = False) -> tuple[float, float]:
    """Count-level budget implied by a trajectory-level (eps, delta) guarantee over b removals.

    The default sums the delta terms up to b - 1, the bound the chain argument actually yields;
    ``statement_bound`` sums up to b, the looser form sometimes quoted.
    """
    if b < 1 or int(b) != b:
        raise ValueError(f"b must be a positive integer, got {b}")
    last = int(b) if statement_bound else int(b) - 1
    return int(b) * eps, delta * math.fsum(math.exp(i * eps) for i in range(last + 1))


def adjacency_chain(ds: FoQDataset, removed: Sequence[int]) -> list[FoQDataset]:
    """Datasets obtained by dropping the given points one at a time, starting from ds itself."""
    indices = list(removed)
    if len(set(indices)) != len(indices):
        raise ValueError("removed indices must be distinct")
    if any(i < 0 or i >= len(ds) for i in indices):
        raise ValueError("removed index outside dataset")
    chain = [ds]
    keep = np.ones(len(ds), dtype=bool)
    for i in indices:
        keep[i] = False
        chain.append(ds.select(keep.copy()))
    return chain
