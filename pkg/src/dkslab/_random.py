"""Seeded stream helpers shared by every stochastic routine."""
from __future__ import annotations

import numpy as np

SEED_MASK = (1 << 64) - 1


def stream(seed: int, *task: int) -> np.random.Generator:
    """Generator for ``(seed, task...)``.

    Substreams are keyed by the task index, never by worker identity, so
    results do not depend on how work is scheduled.
    """
    entropy = [int(seed) & SEED_MASK] + [int(t) for t in task]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
