"""Curation data models: embeddings and split specifications."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np


NORM_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class Embedding:
    """Feature vector of one image."""

    vector: np.ndarray
    image_name: str = ""
    zero_variance: bool = False

    def __post_init__(self):
        vector = np.asarray(self.vector, dtype=np.float64).ravel()
        vector.flags.writeable = False
        object.__setattr__(self, 'vector', vector)

    @property
    def dimension(self) -> int:
        return int(self.vector.shape[0])

    def validate(self) -> bool:
        """Normalised vectors have unit length; flagged zero-variance vectors are all zero."""
        norm = float(np.linalg.norm(self.vector))
        if self.zero_variance:
            if norm != 0.0:
                raise ValueError(f"Zero-variance embedding for {self.image_name} is not the zero vector")
        elif abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"Embedding for {self.image_name} has norm {norm}, expected 1")
        return True

    def distance(self, other: 'Embedding') -> float:
        return float(np.linalg.norm(self.vector - other.vector))


@dataclass(frozen=True)
class SplitSpec:
    """Train/val/test ratios and shuffle seed."""

    ratios: Tuple[float, float, float] = (0.714, 0.143, 0.143)
    seed: int = 0

    def validate(self) -> bool:
        if len(self.ratios) != 3:
            raise ValueError("Split ratios must be a (train, val, test) triple")
        if any(r < 0 for r in self.ratios):
            raise ValueError(f"Split ratios must be nonnegative, got {self.ratios}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"Split ratios must sum to 1, got {sum(self.ratios)}")
        return True

    def to_dict(self) -> dict:
        return {'ratios': list(self.ratios), 'seed': self.seed}
