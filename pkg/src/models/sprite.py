"""Sprite and sprite catalog data models."""

from dataclasses import dataclass, field
from typing import FrozenSet, Iterator, List, Optional, Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class Sprite:
    """RGBA flame image with crop metadata and provenance tags.

    Pixels are stored as a read-only (height, width, 4) uint8 array.
    """

    pixels: np.ndarray
    tags: FrozenSet[str] = frozenset()
    source_frame: int = 0
    source_path: str = ""
    crop_offset: Tuple[int, int] = (0, 0)
    trimmed: bool = True

    def __post_init__(self):
        """Freeze the raster so sprites stay immutable after construction."""
        pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        pixels.flags.writeable = False
        object.__setattr__(self, 'pixels', pixels)
        object.__setattr__(self, 'tags', frozenset(self.tags))

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def aspect_ratio(self) -> float:
        """Width over height."""
        return self.width / self.height

    @property
    def alpha(self) -> np.ndarray:
        return self.pixels[:, :, 3]

    def validate(self, alpha_threshold: int = 0) -> bool:
        """Validate raster shape and, for trimmed sprites, alpha-tight borders."""
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 4:
            raise ValueError(f"Sprite pixels must be (H, W, 4), got {self.pixels.shape}")

        if self.width < 1 or self.height < 1:
            raise ValueError("Sprite must be at least 1x1")

        if self.trimmed:
            mask = self.alpha > alpha_threshold
            if not (mask[0].any() and mask[-1].any() and mask[:, 0].any() and mask[:, -1].any()):
                raise ValueError("Trimmed sprite has a fully transparent border row or column")

        return True

    def to_dict(self) -> dict:
        """Manifest entry without pixel data."""
        return {
            'path': self.source_path,
            'frame': self.source_frame,
            'width': self.width,
            'height': self.height,
            'tags': sorted(self.tags),
            'offset': list(self.crop_offset)
        }


@dataclass
class SpriteCatalog:
    """Deterministically ordered collection of sprites."""

    sprites: List[Sprite] = field(default_factory=list)
    manifest_path: Optional[str] = None
    skipped: int = 0

    def __len__(self) -> int:
        return len(self.sprites)

    def __getitem__(self, index: int) -> Sprite:
        return self.sprites[index]

    def __iter__(self) -> Iterator[Sprite]:
        return iter(self.sprites)

    def is_empty(self) -> bool:
        return not self.sprites

    def tag_counts(self) -> dict:
        """Number of sprites carrying each tag."""
        counts = {}
        for sprite in self.sprites:
            for tag in sprite.tags:
                counts[tag] = counts.get(tag, 0) + 1
        return dict(sorted(counts.items()))
