"""Annotation and manifest formats: frame JSON, YOLO, COCO and detection files."""

import json
import logging
import math
import re
from enum import Enum
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..models.annotation import (
    FIRE_CLASS_ID, FIRE_CLASS_NAME, AnnotationRecord, DatasetManifest, DetectionRecord,
    ObjectAnnotation, Origin, Provenance, Split
)
from ..models.errors import ArtifactIOError, InvalidBox, ParseError
from ..models.geometry import BBox


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FLOAT_DECIMALS = 6

_WHITESPACE = re.compile(r'[ \t\n\r]*')


def canonical_dumps(obj: Any) -> str:
    """Compact JSON with sorted keys and fixed 6-decimal floats.

    Identical inputs always give identical text.
    """
    if obj is None:
        return 'null'
    if isinstance(obj, Enum):
        return canonical_dumps(obj.value)
    if isinstance(obj, (bool, np.bool_)):
        return 'true' if obj else 'false'
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            raise ValueError(f"Cannot serialize non-finite float {value}")
        return f"{value:.{FLOAT_DECIMALS}f}"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: str(kv[0]))
        return '{' + ','.join(f"{json.dumps(str(k), ensure_ascii=False)}:{canonical_dumps(v)}"
                              for k, v in items) + '}'
    if isinstance(obj, (list, tuple, np.ndarray)):
        return '[' + ','.join(canonical_dumps(v) for v in obj) + ']'
    raise TypeError(f"Cannot serialize {type(obj).__name__}")


def write_text(path: PathLike, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(text)
    except OSError as e:
        raise ArtifactIOError(f"Cannot write {path}: {e}") from e


def _read_json(path: PathLike) -> Any:
    return _decode_json(_read_text(path), path)


def _read_text(path: PathLike) -> str:
    path = Path(path)
    try:
        return path.read_text(encoding='utf-8')
    except OSError as e:
        raise ArtifactIOError(f"Cannot read {path}: {e}") from e


def _decode_json(text: str, path: PathLike) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"Invalid JSON in {path}: {e.msg}", line=e.lineno, column=e.colno) from e


def _line_column(text: str, offset: int) -> Tuple[int, int]:
    """1-based line and column of a character offset, as json reports them."""
    return text.count('\n', 0, offset) + 1, offset - text.rfind('\n', 0, offset)


def array_positions(text: str) -> List[Tuple[int, int]]:
    """(line, column) of each element of a top-level JSON array; empty for anything else.

    text must already be valid JSON.
    """
    decoder = json.JSONDecoder()
    index = _WHITESPACE.match(text).end()
    if not text.startswith('[', index):
        return []
    index = _WHITESPACE.match(text, index + 1).end()
    offsets = []
    while not text.startswith(']', index):
        offsets.append(index)
        _, index = decoder.raw_decode(text, index)
        index = _WHITESPACE.match(text, index).end()
        if text.startswith(',', index):
            index = _WHITESPACE.match(text, index + 1).end()
    return [_line_column(text, offset) for offset in offsets]


def write_json(obj: Any, path: PathLike) -> None:
    """Write obj as canonical JSON followed by a newline."""
    write_text(path, canonical_dumps(obj) + '\n')


def read_json(path: PathLike) -> Any:
    return _read_json(path)


def write_frame_json(record: AnnotationRecord, path: PathLike) -> None:
    """Write one frame's annotation record."""
    record.validate()
    write_json(record.to_dict(), path)


def read_frame_json(path: PathLike) -> AnnotationRecord:
    data = _read_json(path)
    try:
        return AnnotationRecord.from_dict(data)
    except (KeyError, TypeError) as e:
        raise ParseError(f"Malformed frame annotation {path}: {e}") from e


def yolo_lines(record: AnnotationRecord) -> List[str]:
    """One "class cx cy w h" line per object, normalized by the image size."""
    width, height = record.image_size
    return [
        f"{obj.class_id} {obj.box.cx / width:.6f} {obj.box.cy / height:.6f} "
        f"{obj.box.w / width:.6f} {obj.box.h / height:.6f}"
        for obj in record.objects
    ]


def write_yolo(record: AnnotationRecord, path: PathLike) -> None:
    """Write a YOLO label file; a record without objects gives an empty file."""
    record.validate()
    lines = yolo_lines(record)
    write_text(path, ''.join(line + '\n' for line in lines))


def export_yolo_dir(manifest: DatasetManifest, directory: PathLike) -> int:
    """Write one label file per record, named after the image stem."""
    directory = Path(directory)
    for record in manifest.records:
        write_yolo(record, directory / f"{Path(record.image_name).stem}.txt")
    logger.info(f"Wrote {len(manifest)} YOLO label files to {directory}")
    return len(manifest)


def coco_dict(manifest: DatasetManifest) -> dict:
    """COCO-style dictionary; ids start at 1 in manifest order."""
    images = []
    annotations = []
    annotation_id = 1
    for image_id, record in enumerate(manifest.records, start=1):
        images.append({
            'id': image_id,
            'file_name': record.image_name,
            'width': record.image_size[0],
            'height': record.image_size[1]
        })
        for obj in record.objects:
            box = obj.box
            annotations.append({
                'id': annotation_id,
                'image_id': image_id,
                'category_id': obj.class_id + 1,
                'bbox': [float(box.x_min), float(box.y_min), float(box.w), float(box.h)],
                'area': float(box.area),
                'iscrowd': 0
            })
            annotation_id += 1

    return {
        'info': {
            'origin': manifest.origin.value,
            'split': manifest.split.value,
            'provenance': manifest.provenance.to_dict()
        },
        'images': images,
        'annotations': annotations,
        'categories': [{'id': FIRE_CLASS_ID + 1, 'name': FIRE_CLASS_NAME, 'supercategory': FIRE_CLASS_NAME}]
    }


def export_coco(manifest: DatasetManifest, path: PathLike) -> None:
    """Write the manifest as a single COCO-style JSON file."""
    manifest.validate()
    write_json(coco_dict(manifest), path)
    logger.info(f"Exported {len(manifest)} images and {manifest.box_count} boxes to {path}")


def import_coco(path: PathLike) -> DatasetManifest:
    """Read a COCO-style file back into a manifest, keeping image order."""
    data = _read_json(path)
    try:
        records = {}
        order = []
        for image in data['images']:
            records[image['id']] = AnnotationRecord(
                image_name=image['file_name'],
                image_size=(int(image['width']), int(image['height']))
            )
            order.append(image['id'])

        for ann in data['annotations']:
            x, y, w, h = (float(v) for v in ann['bbox'])
            records[ann['image_id']].objects.append(
                ObjectAnnotation(int(ann['category_id']) - 1, BBox.from_corners(x, y, x + w, y + h))
            )

        info = data.get('info') or {}
        return DatasetManifest(
            records=[records[i] for i in order],
            origin=Origin(info.get('origin', Origin.REAL.value)),
            split=Split(info.get('split', Split.UNSPLIT.value)),
            provenance=Provenance.from_dict(info.get('provenance') or {})
        )
    except (KeyError, TypeError) as e:
        raise ParseError(f"Malformed COCO file {path}: missing {e}") from e


def write_manifest(manifest: DatasetManifest, path: PathLike) -> None:
    manifest.validate()
    write_json(manifest.to_dict(), path)
    logger.debug(f"Wrote manifest with {len(manifest)} records to {path}")


def read_manifest(path: PathLike) -> DatasetManifest:
    data = _read_json(path)
    try:
        manifest = DatasetManifest.from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"Malformed manifest {path}: {e}") from e
    manifest.validate()
    return manifest


def parse_detections(data: Any, source: str = "detections",
                     positions: Optional[Sequence[Tuple[int, int]]] = None) -> List[DetectionRecord]:
    """Validate decoded detection objects.

    positions, when given, holds the (line, column) of each entry for error reports.

    Raises:
        ParseError: data is not a list of detection objects
        InvalidConfidence: A confidence lies outside [0, 1]
        InvalidBox: A box has zero width or height
    """
    if not isinstance(data, list):
        raise ParseError(f"{source} must hold a JSON array of detections")

    detections = []
    for index, item in enumerate(data):
        line, column = positions[index] if positions and index < len(positions) else (None, None)
        if not isinstance(item, dict):
            raise ParseError(f"{source}: entry {index} is not an object", line=line, column=column)
        try:
            box = BBox(float(item['cx']), float(item['cy']), float(item['w']), float(item['h']))
            detection = DetectionRecord(
                image_name=str(item['image']),
                class_id=int(item.get('class', FIRE_CLASS_ID)),
                confidence=float(item['confidence']),
                box=box
            )
        except KeyError as e:
            raise ParseError(f"{source}: entry {index} is missing key {e}", line=line, column=column) from e
        except InvalidBox as e:
            raise InvalidBox(f"{source}: entry {index}: {e}") from e
        except (TypeError, ValueError) as e:
            raise ParseError(f"{source}: entry {index} has a malformed value: {e}",
                             line=line, column=column) from e
        detection.validate()
        detections.append(detection)
    return detections


def read_detections(path: PathLike) -> List[DetectionRecord]:
    """Read a JSON array of {image, class, confidence, cx, cy, w, h} objects."""
    text = _read_text(path)
    detections = parse_detections(_decode_json(text, path), str(path), array_positions(text))
    logger.debug(f"Read {len(detections)} detections from {path}")
    return detections


def write_detections(detections: Sequence[DetectionRecord], path: PathLike) -> None:
    for detection in detections:
        detection.validate()
    write_json([d.to_dict() for d in detections], path)
