"""Batch pipelines behind the command-line subcommands.

Generators run one task per frame on an order-preserving worker pool. Each
frame draws from its own RNG stream derived from (master_seed, frame_index),
so output bytes do not depend on the worker count.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from ..models.annotation import AnnotationRecord, DatasetManifest, Origin, Provenance, Split
from ..models.curation import Embedding, SplitSpec
from ..models.errors import (
    ArtifactIOError, DimensionMismatch, EmptyCatalog, FuzzForgeError, PairingMismatch, ParseError
)
from ..models.evaluation import EvalReport, SeedStats, TableRow
from ..models.geometry import BBox
from ..models.mixture import BudgetParams, MixtureSpec
from ..models.pipeline_config import PipelineConfig, SpritesSection
from ..models.scene import MethodTag
from ..models.sprite import SpriteCatalog
from ..utils.parallel import ordered_map
from ..utils.raster import ensure_rgba, load_rgba, save_png
from ..utils.rng import frame_rng
from . import curation, dataset_io, metrics, mixtures
from .compositor import generate_m2_frame, load_backgrounds, procedural_background
from .geometry import iou, project_billboard
from .logging_service import LogCategory, get_logging_service
from .resource_monitor import log_snapshot
from .scene_generator import generate_m1_frame, paired_boxes
from .sprite_catalog import build_catalog, write_catalog


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MANIFEST_NAME = 'manifest.json'
COCO_NAME = 'coco.json'
PAIRING_NAME = 'pairing.json'

OUTLINE_WIDTH = 2
OUTLINE_COLOR = (255, 0, 0, 255)
CONTAINMENT_TOLERANCE = 1e-6

# Installed once per worker process by _init_worker
_STATE: Dict[str, Any] = {}


@dataclass(frozen=True)
class DatasetLayout:
    """Directory layout of one generated dataset."""

    root: Path

    @property
    def images(self) -> Path:
        return self.root / 'images'

    @property
    def annotations(self) -> Path:
        return self.root / 'annotations'

    @property
    def labels(self) -> Path:
        return self.root / 'labels'

    @property
    def manifest(self) -> Path:
        return self.root / MANIFEST_NAME

    @property
    def coco(self) -> Path:
        return self.root / COCO_NAME


@dataclass
class FrameResult:
    """What one generator task hands back to the parent process."""

    record: AnnotationRecord
    skipped: int = 0
    paired_record: Optional[AnnotationRecord] = None
    pairs: List[dict] = field(default_factory=list)


@dataclass
class AnnotationDiff:
    """IoU statistics between projected-quad and alpha-tight boxes of the same billboards."""

    pair_count: int
    mean_iou: Optional[float]
    min_iou: Optional[float]
    fully_visible_pairs: int
    containment_violations: int
    ious: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'pairs': self.pair_count,
            'mean_iou': self.mean_iou,
            'min_iou': self.min_iou,
            'fully_visible_pairs': self.fully_visible_pairs,
            'containment_violations': self.containment_violations
        }


def frame_name(prefix: str, frame_index: int) -> str:
    return f"{prefix}_{frame_index:06d}.png"


def run_id(config: PipelineConfig) -> str:
    """Correlation id of a run: config digest prefix and master seed."""
    return f"{config.digest()[:12]}-{config.master_seed}"


def _log_batch(command: str, category: LogCategory, items: int, started: float, skipped: int = 0,
               details: Optional[Dict[str, Any]] = None, correlation_id: Optional[str] = None) -> None:
    get_logging_service().log_batch_summary(
        command, category, items, time.perf_counter() - started, skipped, details, correlation_id
    )


def _provenance(config: PipelineConfig, method: MethodTag, **extra: Any) -> Provenance:
    return Provenance(
        master_seed=config.master_seed,
        method_tag=method.value,
        config_digest=config.digest(),
        extra=extra
    )


def _init_worker(state: Dict[str, Any]) -> None:
    global _STATE
    _STATE = state


def _pick_background(image_size: Tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    backgrounds = _STATE['backgrounds']
    if backgrounds:
        return backgrounds[int(rng.integers(len(backgrounds)))]
    return procedural_background(image_size, rng)


def _write_frame(layout: DatasetLayout, image: np.ndarray, record: AnnotationRecord,
                 formats: Sequence[str]) -> None:
    record.validate()
    save_png(layout.images / record.image_name, image)
    stem = Path(record.image_name).stem
    if 'json' in formats:
        dataset_io.write_frame_json(record, layout.annotations / f"{stem}.json")
    if 'yolo' in formats:
        dataset_io.write_yolo(record, layout.labels / f"{stem}.txt")


def _m1_task(frame_index: int) -> FrameResult:
    config: PipelineConfig = _STATE['config']
    rng = frame_rng(config.master_seed, frame_index)
    background = _pick_background(config.scene.image_size, rng)

    frame, camera, placements = generate_m1_frame(
        config.scene, _STATE['catalog'], background, rng, (config.master_seed, frame_index)
    )
    name = frame_name('m1', frame_index)
    record = AnnotationRecord.from_boxes(name, frame.image_size, frame.boxes)
    _write_frame(DatasetLayout(Path(_STATE['out'])), frame.image, record, _STATE['formats'])

    result = FrameResult(record=record)
    if _STATE['paired']:
        # Box position in the frame record for each placement that projects into view
        m1_index = {}
        for index, (plane, _) in enumerate(placements):
            if project_billboard(camera, plane) is not None:
                m1_index[index] = len(m1_index)

        pairs = paired_boxes(camera, placements, config.compositor.alpha_threshold)
        result.paired_record = AnnotationRecord.from_boxes(name, frame.image_size, [p.alpha_tight for p in pairs])
        result.pairs = [
            {
                'placement': pair.placement_index,
                'm1': m1_index[pair.placement_index],
                'm2': position,
                'fully_visible': pair.fully_visible
            }
            for position, pair in enumerate(pairs)
        ]
    return result


def _m2_task(frame_index: int) -> FrameResult:
    config: PipelineConfig = _STATE['config']
    rng = frame_rng(config.master_seed, frame_index)
    background = _pick_background(config.compositor.image_size, rng)

    frame, _ = generate_m2_frame(
        background, _STATE['catalog'], config.compositor, rng, (config.master_seed, frame_index)
    )
    name = frame_name('m2', frame_index)
    record = AnnotationRecord.from_boxes(name, frame.image_size, frame.boxes)
    _write_frame(DatasetLayout(Path(_STATE['out'])), frame.image, record, _STATE['formats'])
    return FrameResult(record=record, skipped=frame.skipped)


def write_dataset(manifest: DatasetManifest, out_dir: PathLike, formats: Sequence[str]) -> DatasetLayout:
    """Write the manifest and, when requested, the COCO file of a dataset directory."""
    layout = DatasetLayout(Path(out_dir))
    dataset_io.write_manifest(manifest, layout.manifest)
    if 'coco' in formats:
        dataset_io.export_coco(manifest, layout.coco)
    return layout


def prep_sprites(section: SpritesSection, out_dir: PathLike, jobs: int = 1) -> SpriteCatalog:
    """Build the sprite catalog from the configured roots and write it to out_dir.

    Raises:
        EmptyCatalog: No frame yielded a sprite
    """
    started = time.perf_counter()
    section.validate()
    catalog = build_catalog(section.roots, section.stride, section.alpha_threshold, section.trim, jobs)
    if catalog.is_empty():
        raise EmptyCatalog(f"No sprites found under {len(section.roots)} roots")

    write_catalog(catalog, out_dir)
    _log_batch('prep-sprites', LogCategory.SPRITES, len(catalog), started, catalog.skipped,
               {'tags': catalog.tag_counts()})
    return catalog


def _generate(command: str, task, method: MethodTag, image_size: Tuple[int, int], config: PipelineConfig,
              catalog: SpriteCatalog, out_dir: PathLike, count: int, start: int, jobs: int,
              backgrounds_dir: Optional[PathLike], paired: bool) -> Tuple[DatasetManifest, List[FrameResult]]:
    config.validate()
    if catalog.is_empty():
        raise EmptyCatalog(f"{command} needs a non-empty sprite catalog")
    if count < 0 or start < 0:
        raise ValueError(f"Frame count and start must be nonnegative, got {count} and {start}")

    backgrounds = load_backgrounds(backgrounds_dir, image_size) if backgrounds_dir else []
    state = {
        'config': config,
        'catalog': catalog,
        'backgrounds': backgrounds,
        'out': str(out_dir),
        'formats': tuple(config.output.formats),
        'paired': paired
    }

    started = time.perf_counter()
    correlation_id = run_id(config)
    log_snapshot(f"{command} start")
    results = ordered_map(task, range(start, start + count), jobs=jobs, initializer=_init_worker,
                          initargs=(state,), progress=command)
    log_snapshot(f"{command} end")

    manifest = DatasetManifest(
        records=[r.record for r in results],
        origin=Origin.SYNTHETIC,
        split=Split.UNSPLIT,
        provenance=_provenance(config, method, start=start, count=count,
                               backgrounds=len(backgrounds) or 'procedural')
    )
    write_dataset(manifest, out_dir, config.output.formats)

    skipped = sum(r.skipped for r in results)
    _log_batch(command, LogCategory.PIPELINE, len(results), started, skipped,
               {'boxes': manifest.box_count, 'out': str(out_dir)}, correlation_id)
    return manifest, results


def generate_m1(config: PipelineConfig, catalog: SpriteCatalog, out_dir: PathLike, count: int,
                start: int = 0, jobs: int = 1, backgrounds_dir: Optional[PathLike] = None,
                paired_dir: Optional[PathLike] = None) -> DatasetManifest:
    """Render Method 1 frames start..start+count-1 into out_dir.

    With paired_dir, the same frames are also annotated from each sprite's
    alpha-tight extent and a pairing file links the two box lists.
    """
    manifest, results = _generate('gen-m1', _m1_task, MethodTag.M1, config.scene.image_size, config,
                                  catalog, out_dir, count, start, jobs, backgrounds_dir, paired_dir is not None)
    if paired_dir is not None:
        paired = manifest.derive([r.paired_record for r in results], annotation='alpha_tight')
        pairing = [{'image': r.record.image_name, 'pairs': r.pairs} for r in results]
        paired_dir = Path(paired_dir)
        dataset_io.write_manifest(paired, paired_dir / MANIFEST_NAME)
        dataset_io.write_json(pairing, paired_dir / PAIRING_NAME)
        logger.info(f"Wrote paired annotations for {len(paired)} frames to {paired_dir}")
    return manifest


def generate_m2(config: PipelineConfig, catalog: SpriteCatalog, out_dir: PathLike, count: int,
                start: int = 0, jobs: int = 1, backgrounds_dir: Optional[PathLike] = None) -> DatasetManifest:
    """Composite Method 2 frames start..start+count-1 into out_dir."""
    manifest, _ = _generate('gen-m2', _m2_task, MethodTag.M2, config.compositor.image_size, config,
                            catalog, out_dir, count, start, jobs, backgrounds_dir, False)
    return manifest


def load_embeddings(manifest: DatasetManifest, images_dir: Optional[PathLike] = None,
                    cache_path: Optional[PathLike] = None, jobs: int = 1) -> List[Embedding]:
    """Embeddings in manifest order, from a cache file or computed from the images."""
    if cache_path is not None:
        provider = curation.PrecomputedEmbeddingProvider(cache_path)
        return [provider.embed(name) for name in manifest.image_names]
    if images_dir is None:
        raise ValueError("Either an images directory or an embedding cache is required")
    return curation.embed_images(images_dir, manifest.image_names, jobs)


def run_dedup(manifest: DatasetManifest, embeddings: Sequence[Embedding],
              tau: float = curation.DEFAULT_TAU) -> DatasetManifest:
    started = time.perf_counter()
    kept = curation.dedup(embeddings, tau)
    result = manifest.derive([manifest.records[i] for i in kept], dedup_tau=tau)
    _log_batch('dedup', LogCategory.CURATION, len(result), started, len(manifest) - len(result))
    return result


def run_curate(manifest: DatasetManifest, embeddings: Sequence[Embedding], tau: float = curation.DEFAULT_TAU,
               k: Optional[int] = None, strategy: str = 'fps') -> DatasetManifest:
    """Deduplicate, then keep the k most diverse survivors in selection order."""
    started = time.perf_counter()
    kept = curation.dedup(embeddings, tau)
    if k is not None:
        chosen = curation.select_diverse([embeddings[i] for i in kept], k, strategy)
        kept = [kept[i] for i in chosen]

    result = manifest.derive([manifest.records[i] for i in kept], dedup_tau=tau, k=k, strategy=strategy)
    _log_batch('curate', LogCategory.CURATION, len(result), started, len(manifest) - len(result))
    return result


def run_split(manifest: DatasetManifest, spec: SplitSpec, out_dir: PathLike) -> Dict[Split, DatasetManifest]:
    """Split into train/val/test and write one manifest per part."""
    parts = curation.split(manifest, spec)
    out_dir = Path(out_dir)
    result = {}
    for part in parts:
        dataset_io.write_manifest(part, out_dir / f"{part.split.value.lower()}.json")
        result[part.split] = part
    return result


def mixture_path(out_dir: PathLike, spec: MixtureSpec, strategy: Optional[str] = None) -> Path:
    name = f"{spec.name}_seed{spec.seed}.json"
    return Path(out_dir) / strategy / name if strategy else Path(out_dir) / name


def run_mix(real_pool: DatasetManifest, synth_pool: DatasetManifest, specs: Sequence[MixtureSpec],
            out_dir: PathLike) -> List[Path]:
    started = time.perf_counter()
    paths = []
    for spec in specs:
        path = mixture_path(out_dir, spec)
        dataset_io.write_manifest(mixtures.build_mixture(real_pool, synth_pool, spec), path)
        paths.append(path)
    _log_batch('mix', LogCategory.MIXTURES, len(paths), started)
    return paths


def run_suite(real_pool: DatasetManifest, synth_pool: DatasetManifest, seeds: Sequence[int],
              out_dir: PathLike, total: int = mixtures.SUITE_TOTAL) -> List[Path]:
    """Write every strategy mixture for every seed under out_dir/<strategy>/."""
    started = time.perf_counter()
    paths = []
    for spec, manifest in mixtures.strategy_suite(real_pool, synth_pool, seeds, total):
        path = mixture_path(out_dir, spec, manifest.provenance.extra['strategy'])
        dataset_io.write_manifest(manifest, path)
        paths.append(path)
    _log_batch('mix', LogCategory.MIXTURES, len(paths), started, details={'seeds': list(seeds)})
    return paths


def run_eval(detections_paths: Union[PathLike, Sequence[PathLike]], truth_path: PathLike,
             out_path: Optional[PathLike] = None, interpolation: str = '101') -> EvalReport:
    """Score one detections file, or one per seed with mean and std in seed_stats."""
    if isinstance(detections_paths, (str, Path)):
        detections_paths = [detections_paths]
    runs = [dataset_io.read_detections(p) for p in detections_paths]
    truth = dataset_io.read_manifest(truth_path)
    report = metrics.evaluate_seeds(runs, truth, interpolation)
    if out_path is not None:
        dataset_io.write_json(report.to_dict(), out_path)
    return report


def _seed_stats(value: Any, base: Path, row: str) -> SeedStats:
    """A cell is either explicit {mean, std} statistics or a list of eval report files."""
    if isinstance(value, dict):
        return SeedStats.from_dict(value)
    if isinstance(value, list):
        reports = [EvalReport.from_dict(dataset_io.read_json(base / p)) for p in value]
        return metrics.aggregate_seeds(reports)
    raise ParseError(f"Row {row}: a cell must be a mapping or a list of report files")


def load_report_table(path: PathLike) -> Tuple[List[TableRow], List[Tuple[str, str]]]:
    """Read a YAML table description.

    The file holds `columns`, a list of [test_set, metric] pairs, and `rows`,
    each with a `name` and `cells` mapping test sets to statistics or to
    report files (relative to the YAML file).
    """
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding='utf-8'))
    except OSError as e:
        raise ArtifactIOError(f"Cannot read report table {path}: {e}") from e
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise ParseError(f"Invalid YAML in {path}", line=mark.line + 1 if mark else None,
                         column=mark.column + 1 if mark else None) from e

    try:
        columns = [(str(test_set), str(metric)) for test_set, metric in data['columns']]
        rows = [
            TableRow(
                name=str(row['name']),
                cells={str(k): _seed_stats(v, path.parent, row['name']) for k, v in row['cells'].items()}
            )
            for row in data['rows']
        ]
    except FuzzForgeError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"Malformed report table {path}: {e}") from e
    return rows, columns


def _outline_cells(box: BBox) -> Tuple[int, int, int, int]:
    return (math.floor(box.x_min), math.floor(box.y_min), math.ceil(box.x_max), math.ceil(box.y_max))


def overlay(image: np.ndarray, record: AnnotationRecord, color: Tuple[int, int, int, int] = OUTLINE_COLOR,
            width: int = OUTLINE_WIDTH) -> np.ndarray:
    """Copy of image with a width-pixel rectangle outline drawn inside each box's pixel cells.

    Raises:
        DimensionMismatch: The image size differs from the record, or a box leaves the image
    """
    ensure_rgba(image)
    height, image_width = image.shape[:2]
    if (image_width, height) != tuple(record.image_size):
        raise DimensionMismatch(
            f"Image is {image_width}x{height}, record {record.image_name} expects "
            f"{record.image_size[0]}x{record.image_size[1]}"
        )

    result = image.copy()
    for box in record.boxes:
        if not box.within_image(image_width, height):
            raise DimensionMismatch(f"Box {box} lies outside the {image_width}x{height} image")
        x0, y0, x1, y1 = _outline_cells(box)
        result[y0:min(y0 + width, y1), x0:x1] = color
        result[max(y1 - width, y0):y1, x0:x1] = color
        result[y0:y1, x0:min(x0 + width, x1)] = color
        result[y0:y1, max(x1 - width, x0):x1] = color
    return result


def overlay_file(image_path: PathLike, annotation_path: PathLike, out_path: PathLike) -> None:
    record = dataset_io.read_frame_json(annotation_path)
    save_png(out_path, overlay(load_rgba(image_path), record))
    logger.info(f"Drew {len(record.objects)} boxes onto {out_path}")


def diff_annotations(m1: DatasetManifest, m2: DatasetManifest, pairing: Sequence[dict]) -> AnnotationDiff:
    """Compare Method 1 boxes with alpha-tight boxes of the same billboards.

    Containment is checked only for pairs flagged fully_visible, where the
    projected quad box must enclose the alpha-tight box.

    Raises:
        PairingMismatch: The pairing names frames or boxes missing from either run
    """
    m1_records = m1.by_name()
    m2_records = m2.by_name()
    ious = []
    fully_visible = 0
    violations = 0

    for entry in pairing:
        try:
            name = entry['image']
            pairs = entry['pairs']
        except (KeyError, TypeError) as e:
            raise ParseError(f"Malformed pairing entry: {e}") from e
        if name not in m1_records or name not in m2_records:
            raise PairingMismatch(f"Paired frame {name} is missing from one of the runs")

        m1_boxes = m1_records[name].boxes
        m2_boxes = m2_records[name].boxes
        for pair in pairs:
            try:
                i, j = int(pair['m1']), int(pair['m2'])
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError(f"Frame {name}: malformed pair {pair}") from e
            if not (0 <= i < len(m1_boxes) and 0 <= j < len(m2_boxes)):
                raise PairingMismatch(f"Frame {name}: pair ({i}, {j}) is out of range")
            projected, tight = m1_boxes[i], m2_boxes[j]
            ious.append(iou(projected, tight))
            if pair.get('fully_visible', False):
                fully_visible += 1
                if not projected.contains(tight, CONTAINMENT_TOLERANCE):
                    violations += 1
                    logger.warning(f"Frame {name}: projected box {i} does not contain alpha box {j}")

    diff = AnnotationDiff(
        pair_count=len(ious),
        mean_iou=float(np.mean(ious)) if ious else None,
        min_iou=float(np.min(ious)) if ious else None,
        fully_visible_pairs=fully_visible,
        containment_violations=violations,
        ious=ious
    )
    logger.info(f"Compared {diff.pair_count} box pairs: mean IoU {diff.mean_iou}, "
                f"{violations} containment violations")
    return diff


def diff_annotation_files(m1_manifest: PathLike, paired_manifest: PathLike, pairing_path: PathLike) -> AnnotationDiff:
    pairing = dataset_io.read_json(pairing_path)
    if not isinstance(pairing, list):
        raise ParseError(f"{pairing_path} must hold a JSON array")
    return diff_annotations(dataset_io.read_manifest(m1_manifest), dataset_io.read_manifest(paired_manifest), pairing)


def run_budget(params: BudgetParams, step: int, n_synth_max: Optional[int] = None,
               min_total: int = 0) -> List[Tuple[int, int]]:
    pairs = mixtures.budget_frontier(params, step, n_synth_max, min_total)
    logger.info(f"Budget frontier has {len(pairs)} feasible pairs")
    return pairs


def run_export(manifest: DatasetManifest, yolo_dir: Optional[PathLike] = None,
               coco_path: Optional[PathLike] = None) -> None:
    if yolo_dir is None and coco_path is None:
        raise ValueError("Export needs a YOLO directory, a COCO path, or both")
    if yolo_dir is not None:
        dataset_io.export_yolo_dir(manifest, yolo_dir)
    if coco_path is not None:
        dataset_io.export_coco(manifest, coco_path)
