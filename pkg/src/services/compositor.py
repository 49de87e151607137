"""Method 2 generator: sprites overlaid on 2D backgrounds with alpha-exact boxes."""

import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image

from ..models.errors import DimensionMismatch, EmptyCatalog, EmptyVisibleRegion, PlacementExhausted
from ..models.geometry import BBox
from ..models.scene import CompositorParams, GeneratedFrame, MethodTag, OverlaySpec, Sampling
from ..models.sprite import Sprite, SpriteCatalog
from ..utils.raster import alpha_over, ensure_rgba, load_rgba, tight_box
from ..utils.rng import uniform_in
from .sprite_catalog import list_frames


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

NOISE_LATTICE = 6
NOISE_AMPLITUDE = 48.0

_RESAMPLE = {
    Sampling.NEAREST: Image.Resampling.NEAREST,
    Sampling.BILINEAR: Image.Resampling.BILINEAR
}


def scaled_size(sprite: Sprite, scale: float) -> Tuple[int, int]:
    """(width, height) of a sprite after scaling, at least one pixel each."""
    return (max(1, int(round(sprite.width * scale))), max(1, int(round(sprite.height * scale))))


def scale_sprite(sprite: Sprite, scale: float, sampling: Sampling = Sampling.NEAREST) -> np.ndarray:
    """Resample a sprite's pixels by scale."""
    size = scaled_size(sprite, scale)
    if size == (sprite.width, sprite.height):
        return np.array(sprite.pixels)
    resized = Image.fromarray(np.array(sprite.pixels)).resize(size, _RESAMPLE[sampling])
    return np.array(resized, dtype=np.uint8)


def _visible_window(top_left: Tuple[int, int], size: Tuple[int, int],
                    image_size: Tuple[int, int]) -> Optional[Tuple[int, int, int, int]]:
    """Image-space (x0, y0, x1, y1) of a placed rectangle's intersection with the image."""
    x, y = top_left
    width, height = size
    image_w, image_h = image_size
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + width, image_w), min(y + height, image_h)
    if x1 <= x0 or y1 <= y0:
        return None
    return x0, y0, x1, y1


def overlay_box(spec: OverlaySpec, pixels: np.ndarray, image_size: Tuple[int, int],
                alpha_threshold: int = 0) -> BBox:
    """Tight box of a placed overlay's own pixels with alpha > alpha_threshold, clipped to the image.

    Raises:
        EmptyVisibleRegion: No such pixel falls inside the image
    """
    height, width = pixels.shape[:2]
    window = _visible_window(spec.top_left, (width, height), image_size)
    if window is None:
        raise EmptyVisibleRegion(f"Overlay of sprite {spec.sprite_index} lies outside the image")

    x0, y0, x1, y1 = window
    x, y = spec.top_left
    visible = pixels[y0 - y:y1 - y, x0 - x:x1 - x, 3] > alpha_threshold
    cells = tight_box(visible)
    if cells is None:
        raise EmptyVisibleRegion(f"Overlay of sprite {spec.sprite_index} has no visible alpha")

    bx0, by0, bx1, by1 = cells
    return BBox.from_corners(x0 + bx0, y0 + by0, x0 + bx1, y0 + by1)


def compose(background: np.ndarray, overlays: Sequence[Tuple[OverlaySpec, Sprite]],
            alpha_threshold: int = 0, sampling: Sampling = Sampling.NEAREST,
            seed_record: Tuple[int, int] = (0, 0)) -> GeneratedFrame:
    """Alpha-composite overlays in listed order and annotate each from its own alpha.

    Overlays whose visible alpha region is empty are skipped and counted on
    the returned frame.
    """
    ensure_rgba(background)
    image = background.copy()
    image_size = (image.shape[1], image.shape[0])

    boxes = []
    skipped = 0
    for spec, sprite in overlays:
        pixels = scale_sprite(sprite, spec.scale, sampling)
        try:
            box = overlay_box(spec, pixels, image_size, alpha_threshold)
        except EmptyVisibleRegion as e:
            logger.warning(f"Skipping overlay: {e}")
            skipped += 1
            continue

        x0, y0, x1, y1 = _visible_window(spec.top_left, (pixels.shape[1], pixels.shape[0]), image_size)
        x, y = spec.top_left
        src = pixels[y0 - y:y1 - y, x0 - x:x1 - x]
        dst = image[y0:y1, x0:x1]
        painted = src[:, :, 3] > 0
        dst[painted] = alpha_over(dst[painted], src[painted])
        boxes.append(box)

    return GeneratedFrame(image=image, boxes=boxes, seed_record=seed_record,
                          method_tag=MethodTag.M2, skipped=skipped)


def visible_fraction(top_left: Tuple[int, int], size: Tuple[int, int], image_size: Tuple[int, int]) -> float:
    """Share of a placed rectangle's area that lies inside the image."""
    window = _visible_window(top_left, size, image_size)
    if window is None:
        return 0.0
    x0, y0, x1, y1 = window
    return ((x1 - x0) * (y1 - y0)) / float(size[0] * size[1])


def randomize_overlays(image_size: Tuple[int, int], catalog: SpriteCatalog, params: CompositorParams,
                       rng: np.random.Generator) -> List[OverlaySpec]:
    """Draw overlay count, sprites, scales and positions for one frame.

    Each overlay is redrawn until at least min_visible_fraction of its scaled
    area lies inside the image.

    Raises:
        EmptyCatalog: The catalog holds no sprites
        PlacementExhausted: An overlay failed every retry
    """
    if catalog.is_empty():
        raise EmptyCatalog("Cannot randomize overlays from an empty sprite catalog")

    image_w, image_h = image_size
    low, high = params.count_range
    count = int(rng.integers(low, high + 1))

    specs = []
    for slot in range(count):
        for _ in range(params.max_retries):
            index = int(rng.integers(len(catalog)))
            sprite = catalog[index]
            target_height = uniform_in(rng, *params.height_fraction_range) * image_h
            scale = target_height / sprite.height
            size = scaled_size(sprite, scale)
            x = int(rng.integers(-size[0] + 1, image_w))
            y = int(rng.integers(-size[1] + 1, image_h))

            if visible_fraction((x, y), size, image_size) >= params.min_visible_fraction:
                specs.append(OverlaySpec(
                    sprite_index=index,
                    top_left=(x, y),
                    scale=scale,
                    min_visible_fraction=params.min_visible_fraction
                ))
                break
        else:
            raise PlacementExhausted(
                f"Overlay {slot} found no placement with visible fraction >= "
                f"{params.min_visible_fraction} in {params.max_retries} tries"
            )

    return specs


def _upsample_lattice(lattice: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear upsampling of a coarse value-noise lattice to (height, width)."""
    rows, cols = lattice.shape
    xs = (np.arange(width) + 0.5) / width * (cols - 1)
    ys = (np.arange(height) + 0.5) / height * (rows - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, cols - 2)
    y0 = np.clip(np.floor(ys).astype(int), 0, rows - 2)
    fx = (xs - x0)[None, :]
    fy = (ys - y0)[:, None]

    top = lattice[y0][:, x0] * (1 - fx) + lattice[y0][:, x0 + 1] * fx
    bottom = lattice[y0 + 1][:, x0] * (1 - fx) + lattice[y0 + 1][:, x0 + 1] * fx
    return top * (1 - fy) + bottom * fy


def procedural_background(image_size: Tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """Opaque gradient-plus-value-noise raster standing in for a rendered scene."""
    width, height = image_size
    if width <= 0 or height <= 0:
        raise DimensionMismatch(f"Background size must be positive, got {image_size}")

    start = rng.uniform(0.0, 255.0, size=3)
    end = rng.uniform(0.0, 255.0, size=3)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    lattice = rng.uniform(-1.0, 1.0, size=(NOISE_LATTICE, NOISE_LATTICE, 3))

    xs = (np.arange(width) + 0.5) / width
    ys = (np.arange(height) + 0.5) / height
    ramp = np.cos(angle) * xs[None, :] + np.sin(angle) * ys[:, None]
    ramp = (ramp - ramp.min()) / (ramp.max() - ramp.min()) if ramp.max() > ramp.min() else np.zeros_like(ramp)

    rgb = start * (1.0 - ramp[..., None]) + end * ramp[..., None]
    noise = np.stack([_upsample_lattice(lattice[:, :, c], width, height) for c in range(3)], axis=-1)
    rgb = np.clip(np.rint(rgb + NOISE_AMPLITUDE * noise), 0, 255).astype(np.uint8)

    alpha = np.full((height, width, 1), 255, dtype=np.uint8)
    return np.concatenate([rgb, alpha], axis=-1)


def load_backgrounds(directory: PathLike, image_size: Optional[Tuple[int, int]] = None) -> List[np.ndarray]:
    """Background rasters of a PNG directory in natural file order.

    Raises:
        DimensionMismatch: A background differs from image_size
    """
    backgrounds = []
    for path in list_frames(directory):
        raster = load_rgba(path)
        if image_size is not None and (raster.shape[1], raster.shape[0]) != tuple(image_size):
            raise DimensionMismatch(f"Background {path.name} is not {image_size[0]}x{image_size[1]}")
        backgrounds.append(raster)

    logger.info(f"Loaded {len(backgrounds)} backgrounds from {directory}")
    return backgrounds


def generate_m2_frame(background: np.ndarray, catalog: SpriteCatalog, params: CompositorParams,
                      rng: np.random.Generator,
                      seed_record: Tuple[int, int] = (0, 0)) -> Tuple[GeneratedFrame, List[OverlaySpec]]:
    """Randomize overlays for one background and composite them."""
    image_size = (background.shape[1], background.shape[0])
    specs = randomize_overlays(image_size, catalog, params, rng)
    overlays = [(spec, catalog[spec.sprite_index]) for spec in specs]
    frame = compose(background, overlays, params.alpha_threshold, params.sampling, seed_record)
    return frame, specs
