"""Detection-evaluation data models."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .annotation import DetectionRecord


IOU_THRESHOLDS: Tuple[float, ...] = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))
METRIC_NAMES = ('ap', 'ap50', 'fitness')


def fitness(ap50: float, ap: float) -> float:
    """Model-selection scalar weighting AP over AP50."""
    return 0.1 * ap50 + 0.9 * ap


@dataclass(frozen=True)
class PRPoint:
    """One point of the cumulative precision-recall sequence."""

    recall: float
    precision: float
    confidence: float


@dataclass(frozen=True)
class MatchResult:
    """A detection and whether it matched a ground-truth box."""

    detection: DetectionRecord
    matched: bool
    iou: float = 0.0


@dataclass
class SeedStats:
    """Mean and sample standard deviation of each metric over seeds."""

    mean: Dict[str, float] = field(default_factory=dict)
    std: Dict[str, float] = field(default_factory=dict)
    count: int = 0

    def to_dict(self) -> dict:
        return {'mean': dict(self.mean), 'std': dict(self.std), 'count': self.count}

    @classmethod
    def from_dict(cls, data: dict) -> 'SeedStats':
        return cls(
            mean={k: float(v) for k, v in data.get('mean', {}).items()},
            std={k: float(v) for k, v in data.get('std', {}).items()},
            count=int(data.get('count', 0))
        )


@dataclass
class EvalReport:
    """AP at each IoU threshold with the derived summary metrics."""

    per_threshold: Dict[float, float]
    ap: float
    ap50: float
    fitness: float
    total_truths: int = 0
    total_detections: int = 0
    empty: bool = False
    seed_stats: Optional[SeedStats] = None

    def validate(self) -> bool:
        if not (0.0 <= self.ap <= self.ap50 + 1e-12 <= 1.0 + 1e-12):
            raise ValueError(f"Expected 0 <= ap <= ap50 <= 1, got ap={self.ap}, ap50={self.ap50}")
        return True

    def metric(self, name: str) -> float:
        return float(getattr(self, name))

    def to_dict(self) -> dict:
        data = {
            'per_threshold': {f"{t:.2f}": v for t, v in sorted(self.per_threshold.items())},
            'ap': self.ap,
            'ap50': self.ap50,
            'fitness': self.fitness,
            'total_truths': self.total_truths,
            'total_detections': self.total_detections,
            'empty': self.empty
        }
        if self.seed_stats is not None:
            data['seed_stats'] = self.seed_stats.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'EvalReport':
        stats = data.get('seed_stats')
        return cls(
            per_threshold={float(t): float(v) for t, v in data.get('per_threshold', {}).items()},
            ap=float(data['ap']),
            ap50=float(data['ap50']),
            fitness=float(data['fitness']),
            total_truths=int(data.get('total_truths', 0)),
            total_detections=int(data.get('total_detections', 0)),
            empty=bool(data.get('empty', False)),
            seed_stats=SeedStats.from_dict(stats) if stats else None
        )


@dataclass
class TableRow:
    """One labelled report row: seed statistics per test set."""

    name: str
    cells: Dict[str, SeedStats]


TableColumns = List[Tuple[str, str]]
