#!/usr/bin/env python3
"""
Command-line driver for the fuzzforge dataset pipeline.

Exit status is 0 on success, 1 on a domain or I/O error and 2 on a usage
error. Logs go to standard error; data goes to files or standard output.
"""

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

# Add parent directory to path so we can import from src
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.config import LOG_LEVELS, get_config
from src.models.curation import SplitSpec
from src.models.mixture import BudgetParams, MixtureSpec
from src.models.pipeline_config import PipelineConfig
from src.services import dataset_io, metrics, pipeline
from src.services.curation import STRATEGIES as SELECTION_STRATEGIES
from src.services.logging_service import setup_logging
from src.services.metrics import INTERPOLATIONS
from src.services.sprite_catalog import load_catalog


logger = logging.getLogger(__name__)

COMMANDS = (
    'prep-sprites', 'gen-m1', 'gen-m2', 'dedup', 'curate', 'split', 'mix',
    'eval', 'report', 'overlay', 'diff-annotations', 'budget', 'export'
)


class Context:
    """Resolved global options shared by every subcommand."""

    def __init__(self, args: argparse.Namespace):
        env = get_config()
        env.validate()
        self.args = args
        self.root = Path(args.root or env.root)
        self.jobs = args.jobs if args.jobs is not None else env.jobs

        if args.config:
            self.config = PipelineConfig.from_yaml(self.path(args.config))
        else:
            self.config = PipelineConfig()
        if args.seed is not None:
            self.config.master_seed = args.seed
        self.config.validate()

    def path(self, value: Optional[str]) -> Optional[Path]:
        """Resolve a path against the dataset root unless it is absolute."""
        if value is None:
            return None
        path = Path(value)
        return path if path.is_absolute() else self.root / path

    def output_path(self, value: Optional[str], default: str) -> Path:
        return self.path(value) if value else self.root / self.config.output.root / default


def positive_int(value: str) -> int:
    """argparse type for counts that must be at least 1."""
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid int value: '{value}'")
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {number}")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='fuzzforge', description='Synthetic fire-imagery dataset engine')
    parser.add_argument('--root', help='Dataset root that relative paths resolve against (default FUZZFORGE_ROOT)')
    parser.add_argument('--config', help='Pipeline YAML file')
    parser.add_argument('--jobs', type=positive_int, help='Worker processes (default FUZZFORGE_JOBS)')
    parser.add_argument('--seed', type=int, help='Master seed; also the split and mixture seed when given')
    parser.add_argument('--log-level', choices=LOG_LEVELS, help='Console log level')
    parser.add_argument('--log-dir', help='Directory for rotating and structured log files')

    sub = parser.add_subparsers(dest='command', metavar='command', required=True)

    p = sub.add_parser('prep-sprites', help='Sample, trim and catalog flame sprite frames')
    p.add_argument('--roots', nargs='+', help='Frame-sequence directories (overrides sprites.roots)')
    p.add_argument('--stride', type=int, help='Frame sampling stride')
    p.add_argument('--alpha-threshold', type=int, help='Alpha value a pixel must exceed to count')
    p.add_argument('--no-trim', action='store_true', help='Keep frames with their transparent margins')
    p.add_argument('--out', help='Catalog directory (default: directory of sprites.catalog)')

    for name, help_text in (('gen-m1', 'Render Method 1 frames'), ('gen-m2', 'Composite Method 2 frames')):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('--catalog', help='Sprite catalog manifest (default sprites.catalog)')
        p.add_argument('--count', type=int, required=True, help='Number of frames')
        p.add_argument('--start', type=int, default=0, help='First frame index')
        p.add_argument('--out', help='Dataset directory')
        p.add_argument('--backgrounds', help='Background PNG directory (default procedural backgrounds)')
        if name == 'gen-m1':
            p.add_argument('--paired', metavar='DIR', help='Also write alpha-tight annotations and a pairing file')

    for name, help_text in (('dedup', 'Remove near-duplicate images'),
                            ('curate', 'Deduplicate and select a diverse subset')):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('--manifest', required=True, help='Input manifest')
        p.add_argument('--images', help='Image directory (default: images/ next to the manifest)')
        p.add_argument('--embeddings', help='Embedding cache JSON (image name to vector)')
        p.add_argument('--tau', type=float, help='Duplicate distance threshold')
        p.add_argument('--out', required=True, help='Output manifest')
        if name == 'curate':
            p.add_argument('--k', type=int, help='Images to keep')
            p.add_argument('--strategy', choices=SELECTION_STRATEGIES, help='Diversity ranking')

    p = sub.add_parser('split', help='Split a manifest into train, val and test')
    p.add_argument('--manifest', required=True, help='Input manifest')
    p.add_argument('--ratios', type=float, nargs=3, metavar=('TRAIN', 'VAL', 'TEST'), help='Split ratios')
    p.add_argument('--out', required=True, help='Directory for train.json, val.json and test.json')

    p = sub.add_parser('mix', help='Build real/synthetic training mixtures')
    p.add_argument('--real', required=True, help='Real pool manifest')
    p.add_argument('--synth', required=True, help='Synthetic pool manifest')
    p.add_argument('--spec', nargs='*', default=[], help='Mixture names such as R500_S500')
    p.add_argument('--seeds', type=int, nargs='+', help='Mixture seeds (default mixtures.seeds)')
    p.add_argument('--suite', action='store_true', help='Build every strategy mixture')
    p.add_argument('--total', type=int, help='Suite training-set size')
    p.add_argument('--out', required=True, help='Output directory')

    p = sub.add_parser('eval', help='Score detections against a truth manifest')
    p.add_argument('--detections', required=True, nargs='+', help='Detections JSON, one file per seed')
    p.add_argument('--truth', required=True, help='Truth manifest')
    p.add_argument('--out', help='Report JSON (default: standard output)')
    p.add_argument('--interpolation', choices=INTERPOLATIONS, default='101', help='Precision interpolation')

    p = sub.add_parser('report', help='Render a comparison table')
    p.add_argument('--input', required=True, help='YAML table description')
    p.add_argument('--format', choices=('markdown', 'csv'), default='markdown', help='Table format')
    p.add_argument('--out', help='Output file (default: standard output)')

    p = sub.add_parser('overlay', help='Draw annotation boxes onto an image')
    p.add_argument('--image', required=True, help='Input PNG')
    p.add_argument('--annotation', required=True, help='Per-frame annotation JSON')
    p.add_argument('--out', required=True, help='Output PNG')

    p = sub.add_parser('diff-annotations', help='Compare projected-quad and alpha-tight boxes')
    p.add_argument('--m1', required=True, help='Method 1 manifest')
    p.add_argument('--m2', required=True, help='Alpha-tight manifest from gen-m1 --paired')
    p.add_argument('--pairing', required=True, help='Pairing file from gen-m1 --paired')
    p.add_argument('--out', help='Statistics JSON (default: standard output)')

    p = sub.add_parser('budget', help='Feasible real/synthetic counts under cost and time budgets')
    p.add_argument('--c-real', type=float, required=True, help='Cost per real image')
    p.add_argument('--c-synth', type=float, required=True, help='Cost per synthetic image')
    p.add_argument('--c-total', type=float, required=True, help='Cost budget')
    p.add_argument('--t-real', type=float, default=0.0, help='Time per real image')
    p.add_argument('--t-synth', type=float, default=0.0, help='Time per synthetic image')
    p.add_argument('--t-total', type=float, default=0.0, help='Time budget')
    p.add_argument('--step', type=int, required=True, help='Real-count step')
    p.add_argument('--n-synth-max', type=int, help='Synthetic count cap')
    p.add_argument('--min-total', type=int, default=0, help='Smallest acceptable total')

    p = sub.add_parser('export', help='Export a manifest as YOLO labels and/or COCO JSON')
    p.add_argument('--manifest', required=True, help='Input manifest')
    p.add_argument('--yolo', help='YOLO label directory')
    p.add_argument('--coco', help='COCO JSON file')

    return parser


def _emit(text: str, out: Optional[Path]) -> None:
    """Write data to a file, or to standard output when no file is given."""
    if out is None:
        sys.stdout.write(text)
    else:
        dataset_io.write_text(out, text)
        logger.info(f"Wrote {out}")


def cmd_prep_sprites(ctx: Context) -> int:
    args, section = ctx.args, ctx.config.sprites
    if args.roots:
        section.roots = list(args.roots)
    if args.stride is not None:
        section.stride = args.stride
    if args.alpha_threshold is not None:
        section.alpha_threshold = args.alpha_threshold
    if args.no_trim:
        section.trim = False

    out_dir = ctx.path(args.out) if args.out else ctx.path(section.catalog).parent
    resolved = replace(section, roots=[str(ctx.path(r)) for r in section.roots])
    pipeline.prep_sprites(resolved, out_dir, ctx.jobs)
    return 0


def _generate(ctx: Context, method: str) -> int:
    args = ctx.args
    catalog = load_catalog(ctx.path(args.catalog or ctx.config.sprites.catalog))
    out_dir = ctx.output_path(args.out, method)
    backgrounds = ctx.path(args.backgrounds or ctx.config.output.backgrounds)

    if method == 'm1':
        pipeline.generate_m1(ctx.config, catalog, out_dir, args.count, args.start, ctx.jobs,
                             backgrounds, ctx.path(args.paired))
    else:
        pipeline.generate_m2(ctx.config, catalog, out_dir, args.count, args.start, ctx.jobs, backgrounds)
    return 0


def _curation_inputs(ctx: Context):
    args = ctx.args
    manifest_path = ctx.path(args.manifest)
    manifest = dataset_io.read_manifest(manifest_path)
    cache = ctx.path(args.embeddings or ctx.config.curation.embedding_cache)
    images = ctx.path(args.images) if args.images else manifest_path.parent / 'images'
    embeddings = pipeline.load_embeddings(manifest, images, cache, ctx.jobs)
    tau = args.tau if args.tau is not None else ctx.config.curation.tau
    return manifest, embeddings, tau


def cmd_dedup(ctx: Context) -> int:
    manifest, embeddings, tau = _curation_inputs(ctx)
    dataset_io.write_manifest(pipeline.run_dedup(manifest, embeddings, tau), ctx.path(ctx.args.out))
    return 0


def cmd_curate(ctx: Context) -> int:
    args, section = ctx.args, ctx.config.curation
    manifest, embeddings, tau = _curation_inputs(ctx)
    k = args.k if args.k is not None else section.k
    strategy = args.strategy or section.strategy
    dataset_io.write_manifest(pipeline.run_curate(manifest, embeddings, tau, k, strategy), ctx.path(args.out))
    return 0


def cmd_split(ctx: Context) -> int:
    args, section = ctx.args, ctx.config.curation
    ratios = tuple(args.ratios) if args.ratios else tuple(section.split_ratios)
    seed = args.seed if args.seed is not None else section.seed
    manifest = dataset_io.read_manifest(ctx.path(args.manifest))
    pipeline.run_split(manifest, SplitSpec(ratios=ratios, seed=seed), ctx.path(args.out))
    return 0


def cmd_mix(ctx: Context) -> int:
    args, section = ctx.args, ctx.config.mixtures
    real = dataset_io.read_manifest(ctx.path(args.real))
    synth = dataset_io.read_manifest(ctx.path(args.synth))
    if args.seeds:
        seeds = list(args.seeds)
    elif args.seed is not None:
        seeds = [args.seed]
    else:
        seeds = list(section.seeds)

    names = args.spec or section.specs
    if args.suite or not names:
        pipeline.run_suite(real, synth, seeds, ctx.path(args.out), args.total or section.total)
    else:
        specs = [MixtureSpec.from_name(name, seed) for name in names for seed in seeds]
        pipeline.run_mix(real, synth, specs, ctx.path(args.out))
    return 0


def cmd_eval(ctx: Context) -> int:
    args = ctx.args
    out = ctx.path(args.out)
    detections = [ctx.path(p) for p in args.detections]
    report = pipeline.run_eval(detections, ctx.path(args.truth), out, args.interpolation)
    if out is None:
        sys.stdout.write(dataset_io.canonical_dumps(report.to_dict()) + '\n')
    return 0


def cmd_report(ctx: Context) -> int:
    args = ctx.args
    rows, columns = pipeline.load_report_table(ctx.path(args.input))
    _emit(metrics.render_table(rows, columns, args.format), ctx.path(args.out))
    return 0


def cmd_overlay(ctx: Context) -> int:
    args = ctx.args
    pipeline.overlay_file(ctx.path(args.image), ctx.path(args.annotation), ctx.path(args.out))
    return 0


def cmd_diff_annotations(ctx: Context) -> int:
    args = ctx.args
    diff = pipeline.diff_annotation_files(ctx.path(args.m1), ctx.path(args.m2), ctx.path(args.pairing))
    _emit(dataset_io.canonical_dumps(diff.to_dict()) + '\n', ctx.path(args.out))
    return 0


def cmd_budget(ctx: Context) -> int:
    args = ctx.args
    params = BudgetParams(
        c_real=args.c_real, c_synth=args.c_synth, c_total=args.c_total,
        t_real=args.t_real, t_synth=args.t_synth, t_total=args.t_total
    )
    pairs = pipeline.run_budget(params, args.step, args.n_synth_max, args.min_total)
    _emit('n_real,n_synth\n' + ''.join(f"{r},{s}\n" for r, s in pairs), None)
    return 0


def cmd_export(ctx: Context) -> int:
    args = ctx.args
    manifest = dataset_io.read_manifest(ctx.path(args.manifest))
    pipeline.run_export(manifest, ctx.path(args.yolo), ctx.path(args.coco))
    return 0


HANDLERS: Dict[str, Callable[[Context], int]] = {
    'prep-sprites': cmd_prep_sprites,
    'gen-m1': lambda ctx: _generate(ctx, 'm1'),
    'gen-m2': lambda ctx: _generate(ctx, 'm2'),
    'dedup': cmd_dedup,
    'curate': cmd_curate,
    'split': cmd_split,
    'mix': cmd_mix,
    'eval': cmd_eval,
    'report': cmd_report,
    'overlay': cmd_overlay,
    'diff-annotations': cmd_diff_annotations,
    'budget': cmd_budget,
    'export': cmd_export
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv and run one subcommand; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    try:
        service = setup_logging(args.log_dir or get_config().log_dir, args.log_level)
    except (ValueError, OSError) as e:
        sys.stderr.write(f"fuzzforge: {e}\n")
        return 1

    try:
        ctx = Context(args)
        logger.info(f"Running {args.command} (seed {ctx.config.master_seed}, jobs {ctx.jobs})")
        return HANDLERS[args.command](ctx)
    except (ValueError, OSError) as e:
        service.log_error_with_context(e, {'command': args.command, 'argv': list(argv or sys.argv[1:])},
                                       component=f"fuzzforge.{args.command}")
        return 1


def main() -> None:
    """Main entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
