"""RGBA raster helpers shared by the generators."""

from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..models.errors import ArtifactIOError, DimensionMismatch


PathLike = Union[str, Path]

PNG_COMPRESS_LEVEL = 6


def load_rgba(path: PathLike) -> np.ndarray:
    """Read an image file as a (H, W, 4) uint8 array."""
    try:
        with Image.open(path) as img:
            if img.mode != 'RGBA':
                img = img.convert('RGBA')
            return np.array(img, dtype=np.uint8)
    except (OSError, UnidentifiedImageError) as e:
        raise ArtifactIOError(f"Cannot read image {path}: {e}") from e


def save_png(path: PathLike, raster: np.ndarray) -> None:
    """Write a raster as PNG; identical arrays give identical bytes."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(np.ascontiguousarray(raster, dtype=np.uint8)).save(
            path, format='PNG', compress_level=PNG_COMPRESS_LEVEL
        )
    except OSError as e:
        raise ArtifactIOError(f"Cannot write image {path}: {e}") from e


def ensure_rgba(raster: np.ndarray) -> np.ndarray:
    """Check for a non-empty (H, W, 4) raster."""
    if raster.ndim != 3 or raster.shape[2] != 4:
        raise DimensionMismatch(f"Expected an RGBA raster (H, W, 4), got shape {raster.shape}")
    if raster.shape[0] == 0 or raster.shape[1] == 0:
        raise DimensionMismatch("Raster is empty")
    return raster


def alpha_over(dst: np.ndarray, src: np.ndarray) -> np.ndarray:
    """Standard "over" operator of straight-alpha src onto dst, both (..., 4) uint8."""
    src_f = src.astype(np.float64) / 255.0
    dst_f = dst.astype(np.float64) / 255.0

    a_src = src_f[..., 3:4]
    a_dst = dst_f[..., 3:4]
    a_out = a_src + a_dst * (1.0 - a_src)

    rgb_num = src_f[..., :3] * a_src + dst_f[..., :3] * a_dst * (1.0 - a_src)
    rgb = np.divide(rgb_num, a_out, out=np.zeros_like(rgb_num), where=a_out > 0)

    out = np.concatenate([rgb, a_out], axis=-1)
    return np.rint(out * 255.0).astype(np.uint8)


def tight_box(mask: np.ndarray) -> Optional[Tuple[int, int, int, int]]:
    """Cell-exact (x_min, y_min, x_max, y_max) of the True cells of a 2-D mask, or None."""
    rows = np.flatnonzero(mask.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(mask.any(axis=0))
    return (int(cols[0]), int(rows[0]), int(cols[-1]) + 1, int(rows[-1]) + 1)
