"""Training-mixture and budget models."""

import re
from dataclasses import dataclass

from .errors import ConfigError


_NAME_PATTERN = re.compile(r'^R(\d+)_S(\d+)$')


@dataclass(frozen=True)
class MixtureSpec:
    """Real/synthetic training mixture named R{n_real}_S{n_synth}."""

    n_real: int
    n_synth: int
    seed: int = 0

    def __post_init__(self):
        if self.n_real < 0 or self.n_synth < 0:
            raise ValueError(f"Mixture counts must be nonnegative, got R{self.n_real}_S{self.n_synth}")

    @property
    def name(self) -> str:
        return f"R{self.n_real}_S{self.n_synth}"

    @property
    def total(self) -> int:
        return self.n_real + self.n_synth

    @classmethod
    def from_name(cls, name: str, seed: int = 0) -> 'MixtureSpec':
        """Parse "R500_S500" style names."""
        match = _NAME_PATTERN.match(name.strip())
        if not match:
            raise ConfigError(f"Mixture name must look like R<n>_S<m>, got {name!r}")
        return cls(n_real=int(match.group(1)), n_synth=int(match.group(2)), seed=seed)

    def to_dict(self) -> dict:
        return {'name': self.name, 'n_real': self.n_real, 'n_synth': self.n_synth, 'seed': self.seed}


@dataclass(frozen=True)
class BudgetParams:
    """Per-image cost and time of real and synthetic data, with total budgets."""

    c_real: float
    c_synth: float
    c_total: float
    t_real: float = 0.0
    t_synth: float = 0.0
    t_total: float = 0.0

    def validate(self) -> bool:
        for name in ('c_real', 'c_synth', 'c_total', 't_real', 't_synth', 't_total'):
            if getattr(self, name) < 0:
                raise ValueError(f"Budget parameter {name} must be nonnegative")
        return True

    def to_dict(self) -> dict:
        return {
            'c_real': self.c_real,
            'c_synth': self.c_synth,
            'c_total': self.c_total,
            't_real': self.t_real,
            't_synth': self.t_synth,
            't_total': self.t_total
        }
