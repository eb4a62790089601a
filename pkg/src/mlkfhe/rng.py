"""Seed-stream helpers.

All randomness in the package flows through numpy Generators derived from a
root seed plus an integer path, so changing the number of ensemble components
(or adding algorithms to an experiment) never perturbs earlier substreams.
"""

from __future__ import annotations

import numpy as np


def substream(*keys: int) -> np.random.Generator:
    """Generator for the substream identified by a path of nonnegative ints."""
    for k in keys:
        if int(k) < 0:
            raise ValueError(f"seed path entries must be nonnegative, got {k}")
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


def child_seed(rng: np.random.Generator) -> int:
    """Draw a fresh integer seed for a nested component."""
    return int(rng.integers(0, 2**31 - 1))
