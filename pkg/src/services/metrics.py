"""Single-class detection metrics: matching, AP, fitness, seed aggregation and report tables."""

import csv
import io
import logging
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np

from ..models.annotation import AnnotationRecord, DatasetManifest, DetectionRecord
from ..models.errors import EmptyInput, UnknownImage
from ..models.evaluation import (
    IOU_THRESHOLDS, METRIC_NAMES, EvalReport, MatchResult, PRPoint, SeedStats, TableRow, fitness
)
from .geometry import iou


logger = logging.getLogger(__name__)

RECALL_THRESHOLDS = np.linspace(0.0, 1.0, 101)
INTERPOLATIONS = ('101', 'continuous')

Truths = Union[DatasetManifest, Mapping[str, AnnotationRecord], Sequence[AnnotationRecord]]


def _truth_index(truths: Truths) -> Dict[str, AnnotationRecord]:
    if isinstance(truths, DatasetManifest):
        return truths.by_name()
    if isinstance(truths, Mapping):
        return dict(truths)
    return {r.image_name: r for r in truths}


def confidence_order(detections: Sequence[DetectionRecord]) -> List[int]:
    """Indices by descending confidence; equal confidences keep input order."""
    return sorted(range(len(detections)), key=lambda i: -detections[i].confidence)


def match(detections: Sequence[DetectionRecord], truths: Truths, iou_threshold: float) -> List[MatchResult]:
    """Greedy one-to-one matching in descending confidence order.

    Each detection takes the unmatched truth box of its image with the
    highest IoU when that IoU reaches iou_threshold.

    Returns:
        Match results in descending confidence order
    """
    records = _truth_index(truths)
    taken: Dict[str, List[bool]] = {}
    results = []

    for index in confidence_order(detections):
        detection = detections[index]
        record = records.get(detection.image_name)
        boxes = record.boxes if record is not None else []
        used = taken.setdefault(detection.image_name, [False] * len(boxes))

        best_iou = 0.0
        best = -1
        for j, box in enumerate(boxes):
            if used[j]:
                continue
            overlap = iou(detection.box, box)
            if overlap > best_iou:
                best_iou = overlap
                best = j

        if best >= 0 and best_iou >= iou_threshold:
            used[best] = True
            results.append(MatchResult(detection, True, best_iou))
        else:
            results.append(MatchResult(detection, False, best_iou))

    return results


def _cumulative(results: Sequence[MatchResult], total_truths: int) -> Tuple[np.ndarray, np.ndarray, List[int]]:
    order = sorted(range(len(results)), key=lambda i: -results[i].detection.confidence)
    matched = np.array([results[i].matched for i in order], dtype=bool)
    tp = np.cumsum(matched)
    fp = np.cumsum(~matched)
    recall = tp / float(total_truths)
    precision = tp / np.maximum(tp + fp, np.finfo(np.float64).eps)
    return recall, precision, order


def pr_curve(results: Sequence[MatchResult], total_truths: int) -> List[PRPoint]:
    """Cumulative (recall, precision) after each detection in confidence order."""
    if total_truths <= 0 or not results:
        return []
    recall, precision, order = _cumulative(results, total_truths)
    return [
        PRPoint(recall=float(r), precision=float(p), confidence=float(results[i].detection.confidence))
        for r, p, i in zip(recall, precision, order)
    ]


def average_precision(results: Sequence[MatchResult], total_truths: int, interpolation: str = '101') -> float:
    """Area under the monotone-interpolated precision-recall curve.

    '101' averages interpolated precision at recall 0, 0.01, ..., 1.00;
    'continuous' integrates it exactly. No truths gives 0.
    """
    if interpolation not in INTERPOLATIONS:
        raise ValueError(f"Unknown interpolation: {interpolation}")
    if total_truths < 0:
        raise ValueError(f"total_truths must be nonnegative, got {total_truths}")

    if total_truths == 0:
        if not results:
            logger.debug("No truths and no detections; AP defined as 0")
        return 0.0
    if not results:
        return 0.0

    recall, precision, _ = _cumulative(results, total_truths)
    interpolated = np.maximum.accumulate(precision[::-1])[::-1]

    if interpolation == 'continuous':
        steps = np.diff(np.concatenate([[0.0], recall]))
        return float(np.sum(steps * interpolated))

    positions = np.searchsorted(recall, RECALL_THRESHOLDS, side='left')
    sampled = np.zeros(len(RECALL_THRESHOLDS))
    reachable = positions < len(recall)
    sampled[reachable] = interpolated[positions[reachable]]
    return float(np.mean(sampled))


def evaluate(detections: Sequence[DetectionRecord], truth: DatasetManifest,
             interpolation: str = '101') -> EvalReport:
    """AP at IoU 0.50:0.95, AP50 and fitness for one detection run.

    Raises:
        UnknownImage: A detection names an image missing from the truth manifest
    """
    records = truth.by_name()
    for detection in detections:
        if detection.image_name not in records:
            raise UnknownImage(f"Detection references unknown image {detection.image_name}")

    total_truths = truth.box_count
    per_threshold = {}
    for threshold in IOU_THRESHOLDS:
        results = match(detections, records, threshold)
        per_threshold[threshold] = average_precision(results, total_truths, interpolation)

    ap = float(np.mean(list(per_threshold.values())))
    ap50 = per_threshold[IOU_THRESHOLDS[0]]
    report = EvalReport(
        per_threshold=per_threshold,
        ap=ap,
        ap50=ap50,
        fitness=fitness(ap50, ap),
        total_truths=total_truths,
        total_detections=len(detections),
        empty=total_truths == 0 and not detections
    )
    logger.info(f"Evaluated {len(detections)} detections against {total_truths} truths: "
                f"AP={report.ap:.4f} AP50={report.ap50:.4f} fitness={report.fitness:.4f}")
    return report


def aggregate_seeds(reports: Sequence[EvalReport]) -> SeedStats:
    """Mean and sample standard deviation (n - 1) of each metric; std is 0 for one report.

    Raises:
        EmptyInput: No reports
    """
    if not reports:
        raise EmptyInput("Cannot aggregate zero reports")

    stats = SeedStats(count=len(reports))
    for name in METRIC_NAMES:
        values = np.array([r.metric(name) for r in reports], dtype=np.float64)
        stats.mean[name] = float(values.mean())
        stats.std[name] = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    return stats


def evaluate_seeds(detection_runs: Sequence[Sequence[DetectionRecord]], truth: DatasetManifest,
                   interpolation: str = '101') -> EvalReport:
    """Evaluate one detection run per seed against the same truth.

    Headline metrics are the per-seed means; seed_stats carries mean and std.

    Raises:
        EmptyInput: No runs
        UnknownImage: A detection names an image missing from the truth manifest
    """
    if not detection_runs:
        raise EmptyInput("Cannot evaluate zero detection runs")

    reports = [evaluate(run, truth, interpolation) for run in detection_runs]
    if len(reports) == 1:
        return reports[0]

    stats = aggregate_seeds(reports)
    return EvalReport(
        per_threshold={t: float(np.mean([r.per_threshold[t] for r in reports])) for t in IOU_THRESHOLDS},
        ap=stats.mean['ap'],
        ap50=stats.mean['ap50'],
        fitness=fitness(stats.mean['ap50'], stats.mean['ap']),
        total_truths=reports[0].total_truths,
        total_detections=sum(r.total_detections for r in reports),
        empty=all(r.empty for r in reports),
        seed_stats=stats
    )


def format_cell(mean: float, std: float) -> str:
    """"mean ± std" in percent with two decimals."""
    return f"{mean * 100:.2f} ± {std * 100:.2f}"


def _column_label(test_set: str, metric: str) -> str:
    return f"{test_set} {metric.upper()}"


def _ranks(values: Dict[int, float]) -> Tuple[List[int], List[int]]:
    """Row indices holding the best and second-best rounded value (higher is better)."""
    distinct = sorted(set(values.values()), reverse=True)
    best = [i for i, v in values.items() if distinct and v == distinct[0]]
    second = [i for i, v in values.items() if len(distinct) > 1 and v == distinct[1]]
    return best, second


def render_table(rows: Sequence[TableRow], columns: Sequence[Tuple[str, str]], fmt: str = 'markdown',
                 row_header: str = 'Training set') -> str:
    """Render seed statistics as a comparison table.

    Markdown cells read "mean ± std" in percent; per column the best value is
    bold and the second best italic, compared after rounding to two decimals.
    Ties for best are listed below the table.

    Args:
        rows: Labelled rows of SeedStats keyed by test set
        columns: (test_set, metric) pairs in display order
        fmt: 'markdown' or 'csv'
        row_header: Title of the label column

    Returns:
        str: Table text ending in a newline
    """
    if fmt == 'csv':
        return _render_csv(rows, columns, row_header)
    if fmt != 'markdown':
        raise ValueError(f"Unknown table format: {fmt}")

    cells: List[List[str]] = [[row.name] for row in rows]
    ties = []
    for test_set, metric in columns:
        present = {}
        for i, row in enumerate(rows):
            stats = row.cells.get(test_set)
            if stats is not None and metric in stats.mean:
                present[i] = round(stats.mean[metric] * 100, 2)

        best, second = _ranks(present)
        if len(best) > 1:
            names = ', '.join(rows[i].name for i in best)
            ties.append(f"{_column_label(test_set, metric)} ({names})")

        for i, row in enumerate(rows):
            if i not in present:
                cells[i].append('n/a')
                continue
            stats = row.cells[test_set]
            text = format_cell(stats.mean[metric], stats.std.get(metric, 0.0))
            if i in best:
                text = f"**{text}**"
            elif i in second:
                text = f"*{text}*"
            cells[i].append(text)

    header = [row_header] + [_column_label(t, m) for t, m in columns]
    lines = [
        '| ' + ' | '.join(header) + ' |',
        '|' + '|'.join(['---'] + [':---:'] * len(columns)) + '|'
    ]
    lines.extend('| ' + ' | '.join(row_cells) + ' |' for row_cells in cells)
    if ties:
        lines.append('')
        lines.append('Ties for best: ' + '; '.join(ties))
    return '\n'.join(lines) + '\n'


def _render_csv(rows: Sequence[TableRow], columns: Sequence[Tuple[str, str]], row_header: str) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    header = [row_header]
    for test_set, metric in columns:
        label = _column_label(test_set, metric)
        header.extend([f"{label} mean", f"{label} std"])
    writer.writerow(header)

    for row in rows:
        values = [row.name]
        for test_set, metric in columns:
            stats = row.cells.get(test_set)
            if stats is None or metric not in stats.mean:
                values.extend(['', ''])
            else:
                values.extend([f"{stats.mean[metric] * 100:.2f}", f"{stats.std.get(metric, 0.0) * 100:.2f}"])
        writer.writerow(values)
    return buffer.getvalue()
