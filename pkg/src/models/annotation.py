"""Annotation, manifest and detection data models."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from .errors import InvalidConfidence
from .geometry import BBox


FIRE_CLASS_ID = 0
FIRE_CLASS_NAME = "fire"

# Six-decimal files can move an edge clipped at the image border by up to this much.
EDGE_SLACK = 1e-6


class Origin(Enum):
    """Where a manifest's images come from."""
    REAL = "Real"
    SYNTHETIC = "Synthetic"
    MIXED = "Mixed"


class Split(Enum):
    """Dataset partition a manifest belongs to."""
    TRAIN = "Train"
    VAL = "Val"
    TEST = "Test"
    UNSPLIT = "Unsplit"


def snap_to_image(box: BBox, width: float, height: float, slack: float = EDGE_SLACK) -> BBox:
    """Move edges that overshoot the image border by at most slack back onto it.

    Boxes further outside are returned unchanged so validation still rejects them.
    """
    x0, y0, x1, y1 = box.to_corners()
    snapped = (
        0.0 if -slack <= x0 < 0.0 else x0,
        0.0 if -slack <= y0 < 0.0 else y0,
        float(width) if width < x1 <= width + slack else x1,
        float(height) if height < y1 <= height + slack else y1
    )
    if snapped == (x0, y0, x1, y1):
        return box
    return BBox.from_corners(*snapped)


@dataclass(frozen=True)
class ObjectAnnotation:
    """One labelled object."""

    class_id: int
    box: BBox

    def to_dict(self) -> dict:
        return {
            'class': self.class_id,
            'cx': float(self.box.cx),
            'cy': float(self.box.cy),
            'w': float(self.box.w),
            'h': float(self.box.h)
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'ObjectAnnotation':
        return cls(class_id=int(data['class']), box=BBox.from_dict(data))


@dataclass
class AnnotationRecord:
    """Annotations of one image, boxes in pixel centre + dimensions."""

    image_name: str
    image_size: Tuple[int, int]
    objects: List[ObjectAnnotation] = field(default_factory=list)

    def validate(self) -> bool:
        """Validate image size, box placement and class ids."""
        if not self.image_name:
            raise ValueError("Annotation record needs an image name")

        width, height = self.image_size
        if width <= 0 or height <= 0:
            raise ValueError(f"Image size must be positive, got {self.image_size}")

        for obj in self.objects:
            if obj.class_id != FIRE_CLASS_ID:
                raise ValueError(f"Only class {FIRE_CLASS_ID} ({FIRE_CLASS_NAME}) is supported, got {obj.class_id}")
            if not obj.box.within_image(width, height):
                raise ValueError(f"Box {obj.box} lies outside the {width}x{height} image {self.image_name}")

        return True

    @property
    def boxes(self) -> List[BBox]:
        return [obj.box for obj in self.objects]

    @classmethod
    def from_boxes(cls, image_name: str, image_size: Tuple[int, int], boxes: List[BBox]) -> 'AnnotationRecord':
        """Record with every box labelled as fire."""
        return cls(
            image_name=image_name,
            image_size=(int(image_size[0]), int(image_size[1])),
            objects=[ObjectAnnotation(FIRE_CLASS_ID, box) for box in boxes]
        )

    def to_dict(self) -> dict:
        return {
            'image': self.image_name,
            'width': self.image_size[0],
            'height': self.image_size[1],
            'objects': [obj.to_dict() for obj in self.objects]
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'AnnotationRecord':
        width, height = int(data['width']), int(data['height'])
        objects = [ObjectAnnotation.from_dict(o) for o in data.get('objects', [])]
        return cls(
            image_name=data['image'],
            image_size=(width, height),
            objects=[ObjectAnnotation(obj.class_id, snap_to_image(obj.box, width, height)) for obj in objects]
        )


@dataclass
class Provenance:
    """How a manifest was produced."""

    master_seed: Optional[int] = None
    method_tag: Optional[str] = None
    config_digest: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            'master_seed': self.master_seed,
            'method_tag': self.method_tag,
            'config_digest': self.config_digest,
            'extra': dict(self.extra)
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'Provenance':
        return cls(
            master_seed=data.get('master_seed'),
            method_tag=data.get('method_tag'),
            config_digest=data.get('config_digest'),
            extra=dict(data.get('extra') or {})
        )


@dataclass
class DatasetManifest:
    """Ordered annotated records with origin, split and provenance."""

    records: List[AnnotationRecord] = field(default_factory=list)
    origin: Origin = Origin.SYNTHETIC
    split: Split = Split.UNSPLIT
    provenance: Provenance = field(default_factory=Provenance)

    def validate(self) -> bool:
        """Image names must be unique; every record must be valid."""
        seen = set()
        for record in self.records:
            if record.image_name in seen:
                raise ValueError(f"Duplicate image name in manifest: {record.image_name}")
            seen.add(record.image_name)
            record.validate()
        return True

    def __len__(self) -> int:
        return len(self.records)

    @property
    def image_names(self) -> List[str]:
        return [r.image_name for r in self.records]

    def by_name(self) -> Dict[str, AnnotationRecord]:
        return {r.image_name: r for r in self.records}

    @property
    def box_count(self) -> int:
        return sum(len(r.objects) for r in self.records)

    def derive(self, records: List[AnnotationRecord], split: Optional[Split] = None,
               **extra: Any) -> 'DatasetManifest':
        """New manifest over records, keeping origin and provenance."""
        provenance = Provenance(
            master_seed=self.provenance.master_seed,
            method_tag=self.provenance.method_tag,
            config_digest=self.provenance.config_digest,
            extra={**self.provenance.extra, **extra}
        )
        return DatasetManifest(
            records=list(records),
            origin=self.origin,
            split=split if split is not None else self.split,
            provenance=provenance
        )

    def to_dict(self) -> dict:
        return {
            'origin': self.origin.value,
            'split': self.split.value,
            'provenance': self.provenance.to_dict(),
            'records': [r.to_dict() for r in self.records]
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'DatasetManifest':
        return cls(
            records=[AnnotationRecord.from_dict(r) for r in data.get('records', [])],
            origin=Origin(data.get('origin', Origin.SYNTHETIC.value)),
            split=Split(data.get('split', Split.UNSPLIT.value)),
            provenance=Provenance.from_dict(data.get('provenance') or {})
        )


@dataclass(frozen=True)
class DetectionRecord:
    """One scored detection."""

    image_name: str
    class_id: int
    confidence: float
    box: BBox

    def validate(self) -> bool:
        if not (0.0 <= self.confidence <= 1.0):
            raise InvalidConfidence(f"Confidence must lie in [0, 1], got {self.confidence}")
        return True

    def to_dict(self) -> dict:
        return {
            'image': self.image_name,
            'class': self.class_id,
            'confidence': float(self.confidence),
            'cx': float(self.box.cx),
            'cy': float(self.box.cy),
            'w': float(self.box.w),
            'h': float(self.box.h)
        }
