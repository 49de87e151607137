"""Scene, overlay and generated-frame models for both generators."""

import math
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from .errors import ConfigError
from .geometry import BBox, Vec3


class MethodTag(Enum):
    """Which generator produced a frame."""
    M1 = "M1"
    M2 = "M2"


class Sampling(Enum):
    """Texture sampling used when a sprite is resampled."""
    NEAREST = "nearest"
    BILINEAR = "bilinear"


@dataclass(frozen=True)
class WorldBox:
    """Axis-aligned box in world units; min == max on an axis collapses it to a point there."""

    min_corner: Vec3
    max_corner: Vec3

    def validate(self) -> bool:
        if len(self.min_corner) != 3 or len(self.max_corner) != 3:
            raise ValueError("World box corners must be 3-vectors")
        if any(lo > hi for lo, hi in zip(self.min_corner, self.max_corner)):
            raise ValueError(f"World box min {self.min_corner} exceeds max {self.max_corner}")
        return True

    @classmethod
    def point(cls, p: Vec3) -> 'WorldBox':
        return cls(min_corner=tuple(p), max_corner=tuple(p))

    def to_dict(self) -> dict:
        return {'min': list(self.min_corner), 'max': list(self.max_corner)}

    @classmethod
    def from_dict(cls, data: dict) -> 'WorldBox':
        return cls(
            min_corner=tuple(float(v) for v in data['min']),
            max_corner=tuple(float(v) for v in data['max'])
        )


def _pair(value, cast=float) -> Tuple:
    low, high = value
    return (cast(low), cast(high))


@dataclass
class SceneConfig:
    """Method 1 scene parameters: camera movement rules and flame placement volume."""

    camera_region: WorldBox = field(default_factory=lambda: WorldBox((-2.0, -1.0, -2.0), (2.0, 0.0, 0.0)))
    yaw_range: Tuple[float, float] = (-math.pi / 4, math.pi / 4)
    pitch_fixed: bool = True
    pitch: float = 0.0
    pitch_range: Tuple[float, float] = (-math.pi / 12, math.pi / 12)
    track_targets: Optional[List[Vec3]] = None
    fov_vertical: float = math.radians(60.0)
    image_size: Tuple[int, int] = (640, 480)
    placement_region: WorldBox = field(default_factory=lambda: WorldBox((-4.0, -1.0, 6.0), (4.0, 1.0, 14.0)))
    flame_count_range: Tuple[int, int] = (1, 3)
    flame_size_range: Tuple[float, float] = (0.5, 3.0)
    background_ref: str = "procedural"
    billboard_normal: Vec3 = (0.0, 0.0, -1.0)
    face_camera: bool = False
    sampling: Sampling = Sampling.NEAREST

    def validate(self) -> bool:
        """Validate ranges and regions."""
        self.camera_region.validate()
        self.placement_region.validate()

        low, high = self.flame_count_range
        if low < 1 or high < low:
            raise ValueError(f"flame_count_range must satisfy 1 <= low <= high, got {self.flame_count_range}")

        low, high = self.flame_size_range
        if low <= 0 or high < low:
            raise ValueError(f"flame_size_range must satisfy 0 < low <= high, got {self.flame_size_range}")

        if self.yaw_range[1] < self.yaw_range[0] or self.pitch_range[1] < self.pitch_range[0]:
            raise ValueError("Angle ranges must satisfy low <= high")

        if not (0 < self.fov_vertical < math.pi):
            raise ValueError(f"fov_vertical must lie in (0, pi), got {self.fov_vertical}")

        width, height = self.image_size
        if width <= 0 or height <= 0:
            raise ValueError(f"image_size must be positive, got {self.image_size}")

        norm = math.sqrt(sum(c * c for c in self.billboard_normal))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"billboard_normal must have unit length, got {norm}")

        return True

    def to_dict(self) -> dict:
        return {
            'camera_region': self.camera_region.to_dict(),
            'yaw_range': list(self.yaw_range),
            'pitch_fixed': self.pitch_fixed,
            'pitch': self.pitch,
            'pitch_range': list(self.pitch_range),
            'track_targets': [list(t) for t in self.track_targets] if self.track_targets else None,
            'fov_vertical': self.fov_vertical,
            'image_size': list(self.image_size),
            'placement_region': self.placement_region.to_dict(),
            'flame_count_range': list(self.flame_count_range),
            'flame_size_range': list(self.flame_size_range),
            'background_ref': self.background_ref,
            'billboard_normal': list(self.billboard_normal),
            'face_camera': self.face_camera,
            'sampling': self.sampling.value
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'SceneConfig':
        """Build from a config section; unknown keys raise ConfigError."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown scene key: {unknown[0]}")

        kwargs = {}
        for key, value in data.items():
            if key in ('camera_region', 'placement_region'):
                kwargs[key] = WorldBox.from_dict(value)
            elif key in ('yaw_range', 'pitch_range', 'flame_size_range'):
                kwargs[key] = _pair(value)
            elif key == 'flame_count_range':
                kwargs[key] = _pair(value, int)
            elif key == 'image_size':
                kwargs[key] = _pair(value, int)
            elif key == 'track_targets':
                kwargs[key] = [tuple(float(c) for c in t) for t in value] if value else None
            elif key == 'billboard_normal':
                kwargs[key] = tuple(float(c) for c in value)
            elif key == 'sampling':
                kwargs[key] = Sampling(value)
            elif key in ('pitch', 'fov_vertical'):
                kwargs[key] = float(value)
            elif key in ('pitch_fixed', 'face_camera'):
                kwargs[key] = bool(value)
            else:
                kwargs[key] = value
        return cls(**kwargs)


@dataclass(frozen=True)
class OverlaySpec:
    """Placement of one sprite on a Method 2 frame; top_left may be negative."""

    sprite_index: int
    top_left: Tuple[int, int]
    scale: float
    min_visible_fraction: float = 0.25

    def validate(self) -> bool:
        if self.scale <= 0:
            raise ValueError(f"Overlay scale must be positive, got {self.scale}")
        if not (0 < self.min_visible_fraction <= 1):
            raise ValueError(f"min_visible_fraction must lie in (0, 1], got {self.min_visible_fraction}")
        return True

    def to_dict(self) -> dict:
        return {
            'sprite_index': self.sprite_index,
            'top_left': list(self.top_left),
            'scale': self.scale,
            'min_visible_fraction': self.min_visible_fraction
        }


@dataclass
class CompositorParams:
    """Method 2 randomizer settings."""

    count_range: Tuple[int, int] = (1, 3)
    height_fraction_range: Tuple[float, float] = (0.05, 0.40)
    min_visible_fraction: float = 0.25
    max_retries: int = 100
    alpha_threshold: int = 0
    sampling: Sampling = Sampling.NEAREST
    image_size: Tuple[int, int] = (640, 480)

    def validate(self) -> bool:
        low, high = self.count_range
        if low < 0 or high < low:
            raise ValueError(f"count_range must satisfy 0 <= low <= high, got {self.count_range}")

        low, high = self.height_fraction_range
        if low <= 0 or high < low:
            raise ValueError(f"height_fraction_range must satisfy 0 < low <= high, got {self.height_fraction_range}")

        if not (0 < self.min_visible_fraction <= 1):
            raise ValueError(f"min_visible_fraction must lie in (0, 1], got {self.min_visible_fraction}")

        if self.max_retries < 1:
            raise ValueError("max_retries must be at least 1")

        if not (0 <= self.alpha_threshold < 255):
            raise ValueError(f"alpha_threshold must lie in [0, 255), got {self.alpha_threshold}")

        return True

    def to_dict(self) -> dict:
        return {
            'count_range': list(self.count_range),
            'height_fraction_range': list(self.height_fraction_range),
            'min_visible_fraction': self.min_visible_fraction,
            'max_retries': self.max_retries,
            'alpha_threshold': self.alpha_threshold,
            'sampling': self.sampling.value,
            'image_size': list(self.image_size)
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'CompositorParams':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown compositor key: {unknown[0]}")

        kwargs = dict(data)
        if 'count_range' in kwargs:
            kwargs['count_range'] = _pair(kwargs['count_range'], int)
        if 'height_fraction_range' in kwargs:
            kwargs['height_fraction_range'] = _pair(kwargs['height_fraction_range'])
        if 'image_size' in kwargs:
            kwargs['image_size'] = _pair(kwargs['image_size'], int)
        if 'sampling' in kwargs:
            kwargs['sampling'] = Sampling(kwargs['sampling'])
        return cls(**kwargs)


@dataclass
class GeneratedFrame:
    """Rendered raster with its annotation boxes and reproducibility record."""

    image: np.ndarray
    boxes: List[BBox]
    seed_record: Tuple[int, int]
    method_tag: MethodTag
    skipped: int = 0

    def validate(self) -> bool:
        """Every box must lie within the image rectangle."""
        height, width = self.image.shape[:2]
        for box in self.boxes:
            if not box.within_image(width, height):
                raise ValueError(f"Box {box} lies outside the {width}x{height} image")
        return True

    @property
    def image_size(self) -> Tuple[int, int]:
        return (int(self.image.shape[1]), int(self.image.shape[0]))
