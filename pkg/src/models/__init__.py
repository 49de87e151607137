"""Data models package for fuzzforge."""

from .errors import (
    FuzzForgeError, ConfigError, InvalidBox, DimensionMismatch, EmptySprite, InvalidStride,
    EmptyCatalog, EmptyVisibleRegion, PlacementExhausted, ArtifactIOError, ParseError,
    InvalidConfidence, UnknownImage, EmptyInput, KTooLarge, PoolTooSmall, PoolOverlap,
    InfeasibleBudget, PairingMismatch
)
from .geometry import BBox, CameraPose, Orientation, Billboard
from .sprite import Sprite, SpriteCatalog
from .scene import MethodTag, Sampling, WorldBox, SceneConfig, OverlaySpec, CompositorParams, GeneratedFrame
from .annotation import (
    Origin, Split, ObjectAnnotation, AnnotationRecord, Provenance, DatasetManifest, DetectionRecord
)
from .curation import Embedding, SplitSpec
from .mixture import MixtureSpec, BudgetParams
from .evaluation import IOU_THRESHOLDS, PRPoint, MatchResult, SeedStats, EvalReport, TableRow, fitness
from .pipeline_config import PipelineConfig

__all__ = [
    'FuzzForgeError', 'ConfigError', 'InvalidBox', 'DimensionMismatch', 'EmptySprite',
    'InvalidStride', 'EmptyCatalog', 'EmptyVisibleRegion', 'PlacementExhausted',
    'ArtifactIOError', 'ParseError', 'InvalidConfidence', 'UnknownImage', 'EmptyInput',
    'KTooLarge', 'PoolTooSmall', 'PoolOverlap', 'InfeasibleBudget', 'PairingMismatch',
    'BBox',
    'CameraPose',
    'Orientation',
    'Billboard',
    'Sprite',
    'SpriteCatalog',
    'MethodTag',
    'Sampling',
    'WorldBox',
    'SceneConfig',
    'OverlaySpec',
    'CompositorParams',
    'GeneratedFrame',
    'Origin',
    'Split',
    'ObjectAnnotation',
    'AnnotationRecord',
    'Provenance',
    'DatasetManifest',
    'DetectionRecord',
    'Embedding',
    'SplitSpec',
    'MixtureSpec',
    'BudgetParams',
    'IOU_THRESHOLDS',
    'PRPoint',
    'MatchResult',
    'SeedStats',
    'EvalReport',
    'TableRow',
    'fitness',
    'PipelineConfig'
]
