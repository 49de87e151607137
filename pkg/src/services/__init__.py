"""Services package for fuzzforge, one module per pipeline stage."""

from .geometry import iou, project_point, project_billboard
from .sprite_catalog import trim_sprite, sample_frames, build_catalog, load_catalog, write_catalog
from .scene_generator import render_m1, generate_m1_frame
from .compositor import compose, generate_m2_frame
from .curation import embed, dedup, select_diverse, split
from .mixtures import build_mixture, strategy_suite, budget_frontier
from .metrics import match, average_precision, evaluate, aggregate_seeds, render_table

# Note: pipeline is imported directly by the command-line driver

__all__ = [
    'iou',
    'project_point',
    'project_billboard',
    'trim_sprite',
    'sample_frames',
    'build_catalog',
    'load_catalog',
    'write_catalog',
    'render_m1',
    'generate_m1_frame',
    'compose',
    'generate_m2_frame',
    'embed',
    'dedup',
    'select_diverse',
    'split',
    'build_mixture',
    'strategy_suite',
    'budget_frontier',
    'match',
    'average_precision',
    'evaluate',
    'aggregate_seeds',
    'render_table'
]
