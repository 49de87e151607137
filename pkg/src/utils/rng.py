"""Seeded random streams."""

import numpy as np


def frame_rng(master_seed: int, frame_index: int) -> np.random.Generator:
    """Independent stream for one frame, derived from (master_seed, frame_index).

    Output does not depend on which worker generates the frame or in what order.
    """
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(frame_index)]))


def seeded_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def uniform_in(rng: np.random.Generator, low: float, high: float) -> float:
    """Uniform draw in [low, high]; always consumes one value so streams stay aligned."""
    value = float(rng.uniform(low, high))
    return low if high <= low else value
