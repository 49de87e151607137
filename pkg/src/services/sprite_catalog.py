"""Flame sprite ingestion: trimming, frame sampling and the tagged catalog."""

import json
import logging
import re
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..models.errors import ArtifactIOError, EmptySprite, InvalidStride
from ..models.sprite import Sprite, SpriteCatalog
from ..utils.parallel import ordered_map
from ..utils.raster import ensure_rgba, load_rgba, save_png, tight_box
from .dataset_io import write_json


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SPRITE_SUFFIXES = ('.png',)
MANIFEST_NAME = 'catalog.json'

_DIGITS = re.compile(r'(\d+)')


def trim_sprite(raw: np.ndarray, alpha_threshold: int = 0, source_frame: int = 0,
                tags: Iterable[str] = (), source_path: str = "") -> Sprite:
    """Crop a raster to the minimal box holding every pixel with alpha > alpha_threshold.

    Args:
        raw: (H, W, 4) uint8 raster
        alpha_threshold: Pixels at or below this alpha count as transparent
        source_frame: Frame index recorded on the sprite
        tags: Provenance tags
        source_path: File the raster came from

    Returns:
        Sprite: Trimmed sprite with its crop offset (x, y)

    Raises:
        EmptySprite: No pixel exceeds the threshold
    """
    ensure_rgba(raw)
    box = tight_box(raw[:, :, 3] > alpha_threshold)
    if box is None:
        raise EmptySprite(f"No pixel with alpha > {alpha_threshold} in {source_path or 'raster'}")

    x0, y0, x1, y1 = box
    return Sprite(
        pixels=raw[y0:y1, x0:x1].copy(),
        tags=frozenset(tags),
        source_frame=source_frame,
        source_path=source_path,
        crop_offset=(x0, y0),
        trimmed=True
    )


def sample_frames(frame_count: int, stride: int) -> List[int]:
    """Frame indices {0, stride, 2*stride, ...} below frame_count."""
    if stride < 1:
        raise InvalidStride(f"Stride must be at least 1, got {stride}")
    if frame_count < 1:
        raise ValueError(f"Frame count must be at least 1, got {frame_count}")
    return list(range(0, frame_count, stride))


def natural_key(name: str) -> Tuple:
    """Sort key treating digit runs as integers, so frame_10 follows frame_9."""
    return tuple(int(part) if part.isdigit() else part for part in _DIGITS.split(name))


def list_frames(directory: PathLike) -> List[Path]:
    """Image files of one frame sequence, in frame order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ArtifactIOError(f"Sprite directory not found: {directory}")
    files = [p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in SPRITE_SUFFIXES]
    return sorted(files, key=lambda p: natural_key(p.name))


def parse_tags(directory: PathLike) -> frozenset:
    """Tags from a directory name split on underscores, e.g. "burst_cone_blue"."""
    return frozenset(token for token in Path(directory).name.split('_') if token)


def _load_frame(task: Tuple[str, int, bool]) -> Tuple[str, Optional[np.ndarray], Tuple[int, int]]:
    """Worker: read one frame and crop it; pixels are None when nothing is coloured."""
    path, alpha_threshold, trim = task
    raw = load_rgba(path)
    box = tight_box(raw[:, :, 3] > alpha_threshold)
    if box is None:
        return path, None, (0, 0)
    if not trim:
        return path, raw, (0, 0)
    x0, y0, x1, y1 = box
    return path, raw[y0:y1, x0:x1].copy(), (x0, y0)


def build_catalog(roots: Sequence[PathLike], stride: int, alpha_threshold: int = 0,
                  trim: bool = True, jobs: int = 1) -> SpriteCatalog:
    """Build a deterministic sprite catalog from frame-sequence directories.

    Roots are visited in lexicographic path order; within each, frames are
    naturally sorted and sampled at stride before trimming. Frames with no
    coloured pixel are skipped and counted.

    Args:
        roots: Directories each holding one rendered frame sequence
        stride: Frame sampling stride
        alpha_threshold: Trim and emptiness threshold
        trim: Crop transparent margins (False keeps raw frames)
        jobs: Worker processes for reading and trimming

    Returns:
        SpriteCatalog: Sprites ordered by (directory, frame index)
    """
    if stride < 1:
        raise InvalidStride(f"Stride must be at least 1, got {stride}")

    tasks = []
    meta = []
    for root in sorted(str(r) for r in roots):
        frames = list_frames(root)
        if not frames:
            logger.warning(f"No sprite frames found in {root}")
            continue
        tags = parse_tags(root)
        picked = sample_frames(len(frames), stride)
        logger.debug(f"{root}: sampling {len(picked)} of {len(frames)} frames at stride {stride}")
        for index in picked:
            tasks.append((str(frames[index]), alpha_threshold, trim))
            meta.append((index, tags))

    results = ordered_map(_load_frame, tasks, jobs=jobs)

    catalog = SpriteCatalog()
    for (path, pixels, offset), (frame_index, tags) in zip(results, meta):
        if pixels is None:
            logger.warning(f"Skipping {path}: no pixel with alpha > {alpha_threshold}")
            catalog.skipped += 1
            continue
        catalog.sprites.append(Sprite(
            pixels=pixels,
            tags=tags,
            source_frame=frame_index,
            source_path=path,
            crop_offset=offset,
            trimmed=trim
        ))

    logger.info(f"Built sprite catalog: {len(catalog)} sprites from {len(roots)} roots "
                f"({catalog.skipped} skipped)")
    return catalog


def write_catalog(catalog: SpriteCatalog, directory: PathLike) -> Path:
    """Write sprite PNGs and the catalog manifest; returns the manifest path."""
    directory = Path(directory)
    entries = []
    for index, sprite in enumerate(catalog):
        name = f"sprite_{index:05d}.png"
        save_png(directory / name, sprite.pixels)
        entry = sprite.to_dict()
        entry['path'] = name
        entry['source'] = sprite.source_path
        entry['trimmed'] = sprite.trimmed
        entries.append(entry)

    manifest_path = directory / MANIFEST_NAME
    write_json(entries, manifest_path)
    catalog.manifest_path = str(manifest_path)
    logger.info(f"Wrote {len(entries)} sprites to {directory}")
    return manifest_path


def load_catalog(manifest_path: PathLike) -> SpriteCatalog:
    """Read a catalog written by write_catalog, preserving manifest order."""
    manifest_path = Path(manifest_path)
    try:
        entries = json.loads(manifest_path.read_text(encoding='utf-8'))
    except OSError as e:
        raise ArtifactIOError(f"Cannot read sprite manifest {manifest_path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ArtifactIOError(f"Malformed sprite manifest {manifest_path}: {e}") from e

    catalog = SpriteCatalog(manifest_path=str(manifest_path))
    for entry in entries:
        pixels = load_rgba(manifest_path.parent / entry['path'])
        sprite = Sprite(
            pixels=pixels,
            tags=frozenset(entry.get('tags', [])),
            source_frame=int(entry.get('frame', 0)),
            source_path=entry.get('source', entry['path']),
            crop_offset=tuple(entry.get('offset', (0, 0))),
            trimmed=bool(entry.get('trimmed', True))
        )
        if (sprite.width, sprite.height) != (entry['width'], entry['height']):
            raise ArtifactIOError(f"Sprite {entry['path']} does not match its manifest size")
        catalog.sprites.append(sprite)

    logger.info(f"Loaded {len(catalog)} sprites from {manifest_path}")
    return catalog
