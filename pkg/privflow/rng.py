from __future__ import annotations

import numpy as np

SeedLike = int | np.random.Generator

# Stream tags keep independent draws apart under one base seed.
STREAM_ARRIVALS = 1
STREAM_PERTURB = 3
STREAM_TRUTH = 5
STREAM_CONCAVITY = 7


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Philox generator keyed by (seed, *keys); identical on every platform."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(int(seed))


def replicate_seed(base_seed: int, index: int) -> int:
    return int(base_seed) + int(index)
