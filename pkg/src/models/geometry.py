"""Geometric value types: bounding boxes, pinhole cameras and billboards."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from .errors import InvalidBox


Vec3 = Tuple[float, float, float]


@dataclass(frozen=True)
class BBox:
    """Axis-aligned rectangle in continuous pixel coordinates, stored as center + dimensions."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        """Reject degenerate boxes at construction."""
        if not (self.w > 0 and self.h > 0):
            raise InvalidBox(f"Box dimensions must be positive, got w={self.w}, h={self.h}")

    @classmethod
    def from_corners(cls, x_min: float, y_min: float, x_max: float, y_max: float) -> 'BBox':
        """Create a box from (x_min, y_min, x_max, y_max)."""
        return cls(
            cx=(x_min + x_max) / 2.0,
            cy=(y_min + y_max) / 2.0,
            w=x_max - x_min,
            h=y_max - y_min
        )

    def to_corners(self) -> Tuple[float, float, float, float]:
        """Return (x_min, y_min, x_max, y_max)."""
        half_w = self.w / 2.0
        half_h = self.h / 2.0
        return (self.cx - half_w, self.cy - half_h, self.cx + half_w, self.cy + half_h)

    @property
    def x_min(self) -> float:
        return self.cx - self.w / 2.0

    @property
    def y_min(self) -> float:
        return self.cy - self.h / 2.0

    @property
    def x_max(self) -> float:
        return self.cx + self.w / 2.0

    @property
    def y_max(self) -> float:
        return self.cy + self.h / 2.0

    @property
    def area(self) -> float:
        return self.w * self.h

    def clip(self, width: float, height: float) -> Optional['BBox']:
        """Intersect with the image rectangle [0, width] x [0, height]."""
        x0 = max(self.x_min, 0.0)
        y0 = max(self.y_min, 0.0)
        x1 = min(self.x_max, float(width))
        y1 = min(self.y_max, float(height))
        if x1 <= x0 or y1 <= y0:
            return None
        return BBox.from_corners(x0, y0, x1, y1)

    def contains(self, other: 'BBox', tolerance: float = 0.0) -> bool:
        """True when other lies inside this box, edges allowed to exceed by tolerance."""
        return (
            other.x_min >= self.x_min - tolerance
            and other.y_min >= self.y_min - tolerance
            and other.x_max <= self.x_max + tolerance
            and other.y_max <= self.y_max + tolerance
        )

    def within_image(self, width: float, height: float, tolerance: float = 1e-9) -> bool:
        """True when the box lies inside [0, width] x [0, height]."""
        return (
            self.x_min >= -tolerance
            and self.y_min >= -tolerance
            and self.x_max <= width + tolerance
            and self.y_max <= height + tolerance
        )

    def to_dict(self) -> dict:
        return {'cx': self.cx, 'cy': self.cy, 'w': self.w, 'h': self.h}

    @classmethod
    def from_dict(cls, data: dict) -> 'BBox':
        return cls(
            cx=float(data['cx']),
            cy=float(data['cy']),
            w=float(data['w']),
            h=float(data['h'])
        )


@dataclass(frozen=True)
class CameraPose:
    """Pinhole camera with square pixels.

    World and camera frames coincide at yaw = pitch = 0: x right, y down, z forward.
    Yaw turns the forward axis toward +x; positive pitch looks up (toward -y).
    """

    position: Vec3
    yaw: float
    pitch: float
    focal: float
    principal_point: Tuple[float, float]
    image_size: Tuple[int, int]

    def validate(self) -> bool:
        """Validate intrinsics and image size."""
        if self.focal <= 0:
            raise ValueError(f"Focal length must be positive, got {self.focal}")

        width, height = self.image_size
        if width <= 0 or height <= 0:
            raise ValueError(f"Image size must be positive, got {self.image_size}")

        if len(self.position) != 3:
            raise ValueError("Camera position must be a 3-vector")

        return True

    @property
    def width(self) -> int:
        return self.image_size[0]

    @property
    def height(self) -> int:
        return self.image_size[1]

    def to_dict(self) -> dict:
        return {
            'position': list(self.position),
            'yaw': self.yaw,
            'pitch': self.pitch,
            'focal': self.focal,
            'principal_point': list(self.principal_point),
            'image_size': list(self.image_size)
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'CameraPose':
        return cls(
            position=tuple(float(v) for v in data['position']),
            yaw=float(data.get('yaw', 0.0)),
            pitch=float(data.get('pitch', 0.0)),
            focal=float(data['focal']),
            principal_point=tuple(float(v) for v in data['principal_point']),
            image_size=tuple(int(v) for v in data['image_size'])
        )


class Orientation(Enum):
    """How a billboard's plane is oriented in the world."""
    FIXED = "fixed"
    FACE_CAMERA = "face_camera"


@dataclass(frozen=True)
class Billboard:
    """Textured planar quad in world space."""

    center: Vec3
    width: float
    height: float
    orientation: Orientation = Orientation.FACE_CAMERA
    normal: Optional[Vec3] = None

    def validate(self) -> bool:
        """Validate extent and, for fixed quads, the unit normal."""
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"Billboard extent must be positive, got {self.width}x{self.height}")

        if self.orientation == Orientation.FIXED:
            if self.normal is None:
                raise ValueError("Fixed billboards need a normal")
            length = math.sqrt(sum(c * c for c in self.normal))
            if abs(length - 1.0) > 1e-9:
                raise ValueError(f"Billboard normal must have unit length, got {length}")

        return True

    @classmethod
    def fixed(cls, center: Vec3, width: float, height: float, normal: Vec3) -> 'Billboard':
        """Fixed-orientation quad with a constant world normal."""
        return cls(center=tuple(center), width=width, height=height,
                   orientation=Orientation.FIXED, normal=tuple(normal))

    @classmethod
    def facing_camera(cls, center: Vec3, width: float, height: float) -> 'Billboard':
        """Quad whose normal is recomputed toward the camera before projection."""
        return cls(center=tuple(center), width=width, height=height,
                   orientation=Orientation.FACE_CAMERA)
