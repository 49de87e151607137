"""Method 1 generator: billboards placed in a 3D volume, annotated by corner projection."""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..models.errors import DimensionMismatch, EmptyCatalog
from ..models.geometry import BBox, Billboard, CameraPose
from ..models.scene import GeneratedFrame, MethodTag, Sampling, SceneConfig
from ..models.sprite import Sprite, SpriteCatalog
from ..utils.raster import alpha_over, ensure_rgba, tight_box
from ..utils.rng import uniform_in
from .geometry import (
    NEAR_PLANE, billboard_frame, camera_from_fov, fully_in_frame, look_at_pitch,
    look_at_yaw, project_billboard, rotation_matrix, world_to_camera
)


logger = logging.getLogger(__name__)

Placement = Tuple[Billboard, Sprite]


@dataclass(frozen=True)
class PairedBox:
    """Both annotations of one billboard: projected quad and projected alpha extent."""

    placement_index: int
    projected: BBox
    alpha_tight: BBox
    fully_visible: bool

    def to_dict(self) -> dict:
        return {
            'placement': self.placement_index,
            'projected': self.projected.to_dict(),
            'alpha_tight': self.alpha_tight.to_dict(),
            'fully_visible': self.fully_visible
        }


def sample_camera(config: SceneConfig, rng: np.random.Generator) -> CameraPose:
    """Draw a camera pose under the movement rules.

    Position is uniform in the camera region. Yaw aims at the nearest track
    target when targets are configured, otherwise it is uniform in yaw_range.
    Pitch stays at the configured value while the horizontal-view rule holds.
    """
    low = np.asarray(config.camera_region.min_corner, dtype=float)
    high = np.asarray(config.camera_region.max_corner, dtype=float)
    position = tuple(float(v) for v in rng.uniform(low, high))

    target = None
    if config.track_targets:
        distances = [math.dist(position, t) for t in config.track_targets]
        target = config.track_targets[int(np.argmin(distances))]
        yaw = look_at_yaw(position, target)
    else:
        yaw = uniform_in(rng, *config.yaw_range)

    if config.pitch_fixed:
        pitch = config.pitch
    elif target is not None:
        pitch = look_at_pitch(position, target)
    else:
        pitch = uniform_in(rng, *config.pitch_range)

    return camera_from_fov(position, yaw, pitch, config.fov_vertical, config.image_size)


def place_billboards(config: SceneConfig, catalog: SpriteCatalog,
                     rng: np.random.Generator) -> List[Placement]:
    """Draw flame billboards inside the placement region.

    Raises:
        EmptyCatalog: The catalog holds no sprites
    """
    if catalog.is_empty():
        raise EmptyCatalog("Cannot place billboards from an empty sprite catalog")

    low, high = config.flame_count_range
    count = int(rng.integers(low, high + 1))

    region_low = np.asarray(config.placement_region.min_corner, dtype=float)
    region_high = np.asarray(config.placement_region.max_corner, dtype=float)

    placements = []
    for _ in range(count):
        sprite = catalog[int(rng.integers(len(catalog)))]
        center = tuple(float(v) for v in rng.uniform(region_low, region_high))
        height = uniform_in(rng, *config.flame_size_range)
        width = height * sprite.aspect_ratio

        if config.face_camera:
            plane = Billboard.facing_camera(center, width, height)
        else:
            plane = Billboard.fixed(center, width, height, config.billboard_normal)
        placements.append((plane, sprite))

    logger.debug(f"Placed {count} billboards")
    return placements


def _sample_texels(sprite: Sprite, s: np.ndarray, t: np.ndarray, sampling: Sampling) -> np.ndarray:
    """Sprite colours at texture coordinates (s, t) in [0, 1]."""
    pixels = sprite.pixels
    height, width = pixels.shape[:2]

    if sampling == Sampling.NEAREST:
        cols = np.clip(np.floor(s * width).astype(int), 0, width - 1)
        rows = np.clip(np.floor(t * height).astype(int), 0, height - 1)
        return pixels[rows, cols]

    x = s * width - 0.5
    y = t * height - 0.5
    x0 = np.floor(x).astype(int)
    y0 = np.floor(y).astype(int)
    fx = (x - x0)[:, None]
    fy = (y - y0)[:, None]
    x0c, x1c = np.clip(x0, 0, width - 1), np.clip(x0 + 1, 0, width - 1)
    y0c, y1c = np.clip(y0, 0, height - 1), np.clip(y0 + 1, 0, height - 1)
    p = pixels.astype(np.float64)
    top = p[y0c, x0c] * (1 - fx) + p[y0c, x1c] * fx
    bottom = p[y1c, x0c] * (1 - fx) + p[y1c, x1c] * fx
    return np.rint(top * (1 - fy) + bottom * fy).astype(np.uint8)


def rasterize_billboard(camera: CameraPose, plane: Billboard, sprite: Sprite,
                        sampling: Sampling = Sampling.NEAREST
                        ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Perspective-correct texture mapping of a sprite onto a billboard.

    A pixel cell is covered when the ray through its centre hits the quad in
    front of the near plane; the texel is looked up at the hit point.

    Returns:
        (rows, cols, rgba) of the covered pixels; empty arrays when nothing is visible
    """
    empty = (np.empty(0, dtype=int), np.empty(0, dtype=int), np.empty((0, 4), dtype=np.uint8))

    box = project_billboard(camera, plane)
    frame = billboard_frame(camera, plane)
    if box is None or frame is None:
        return empty
    center, normal, u_axis, v_axis = frame

    width, height = camera.image_size
    j0, j1 = max(int(math.floor(box.x_min)), 0), min(int(math.ceil(box.x_max)), width)
    i0, i1 = max(int(math.floor(box.y_min)), 0), min(int(math.ceil(box.y_max)), height)
    if j1 <= j0 or i1 <= i0:
        return empty

    cols, rows = np.meshgrid(np.arange(j0, j1), np.arange(i0, i1))
    cols = cols.ravel()
    rows = rows.ravel()

    cx, cy = camera.principal_point
    directions_cam = np.stack([
        (cols + 0.5 - cx) / camera.focal,
        (rows + 0.5 - cy) / camera.focal,
        np.ones(cols.shape)
    ], axis=1)
    directions = directions_cam @ rotation_matrix(camera.yaw, camera.pitch).T

    origin = np.asarray(camera.position, dtype=float)
    denom = directions @ normal
    numer = float((center - origin) @ normal)
    parallel = np.abs(denom) < 1e-12
    # Camera-frame depth of the hit equals the ray parameter since directions have z = 1
    depth = np.divide(numer, denom, out=np.full(denom.shape, -1.0), where=~parallel)

    hits = origin + depth[:, None] * directions
    offset = hits - center
    s = offset @ u_axis / plane.width + 0.5
    t = offset @ v_axis / plane.height + 0.5

    covered = (depth > NEAR_PLANE) & (s >= 0) & (s <= 1) & (t >= 0) & (t <= 1)
    if not covered.any():
        return empty

    rgba = _sample_texels(sprite, s[covered], t[covered], sampling)
    return rows[covered], cols[covered], rgba


def center_depth(camera: CameraPose, plane: Billboard) -> float:
    """Camera-frame depth of the quad centre."""
    return float(world_to_camera(camera, np.asarray(plane.center, dtype=float)[None, :])[0, 2])


def render_m1(camera: CameraPose, placements: Sequence[Placement], background: np.ndarray,
              sampling: Sampling = Sampling.NEAREST,
              seed_record: Tuple[int, int] = (0, 0)) -> GeneratedFrame:
    """Composite billboards over a background and annotate them by corner projection.

    Billboards are painted back to front by centre depth. Boxes follow the
    placement order and cover each visible quad's clipped projection, so
    transparent sprite margins are included in the annotation.

    Raises:
        DimensionMismatch: Background size differs from the camera image size
    """
    ensure_rgba(background)
    width, height = camera.image_size
    if background.shape[:2] != (height, width):
        raise DimensionMismatch(
            f"Background is {background.shape[1]}x{background.shape[0]}, camera expects {width}x{height}"
        )

    image = background.copy()
    boxes = []
    visible = []
    for index, (plane, sprite) in enumerate(placements):
        box = project_billboard(camera, plane)
        if box is None:
            logger.debug(f"Billboard {index} is outside the view")
            continue
        boxes.append(box)
        visible.append(index)

    order = sorted(visible, key=lambda i: -center_depth(camera, placements[i][0]))
    for index in order:
        plane, sprite = placements[index]
        rows, cols, rgba = rasterize_billboard(camera, plane, sprite, sampling)
        painted = rgba[:, 3] > 0
        if not painted.any():
            continue
        rows, cols = rows[painted], cols[painted]
        image[rows, cols] = alpha_over(image[rows, cols], rgba[painted])

    return GeneratedFrame(image=image, boxes=boxes, seed_record=seed_record, method_tag=MethodTag.M1)


def alpha_extent_box(camera: CameraPose, plane: Billboard, sprite: Sprite,
                     alpha_threshold: int = 0) -> Optional[BBox]:
    """Projected box of the sprite's alpha-tight texel rectangle on the quad."""
    texels = tight_box(sprite.alpha > alpha_threshold)
    if texels is None:
        return None
    x0, y0, x1, y1 = texels
    extent = (x0 / sprite.width, y0 / sprite.height, x1 / sprite.width, y1 / sprite.height)
    return project_billboard(camera, plane, extent)


def paired_boxes(camera: CameraPose, placements: Sequence[Placement],
                 alpha_threshold: int = 0) -> List[PairedBox]:
    """Projected-quad and alpha-extent boxes for every visible placement."""
    pairs = []
    for index, (plane, sprite) in enumerate(placements):
        projected = project_billboard(camera, plane)
        tight = alpha_extent_box(camera, plane, sprite, alpha_threshold)
        if projected is None or tight is None:
            continue
        pairs.append(PairedBox(
            placement_index=index,
            projected=projected,
            alpha_tight=tight,
            fully_visible=fully_in_frame(camera, plane)
        ))
    return pairs


def generate_m1_frame(config: SceneConfig, catalog: SpriteCatalog, background: np.ndarray,
                      rng: np.random.Generator,
                      seed_record: Tuple[int, int] = (0, 0)
                      ) -> Tuple[GeneratedFrame, CameraPose, List[Placement]]:
    """Sample a camera and placements, then render one Method 1 frame."""
    camera = sample_camera(config, rng)
    placements = place_billboards(config, catalog, rng)
    frame = render_m1(camera, placements, background, config.sampling, seed_record)
    return frame, camera, placements
