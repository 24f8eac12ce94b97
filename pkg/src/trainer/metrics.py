# src/trainer/metrics.py

from typing import Sequence

from src.model.model_dataclasses import AD, CLASS_NAMES, NON_AD
from src.trainer.trainer_dataclasses import ClassMetrics, ConfusionCounts, MetricsReport
from src.utils.error_handling import ArgumentError, ShapeError

# Challenge baseline rows of the reference results table, for side-by-side reports.
BASELINE_ROWS = {
    NON_AD: ClassMetrics(precision=0.67, recall=0.50, f1=0.57, accuracy=0.625),
    AD: ClassMetrics(precision=0.60, recall=0.75, f1=0.67, accuracy=0.625),
}


def confusion(preds: Sequence[int], labels: Sequence[int]) -> ConfusionCounts:
    """
    Confusion counts with AD as the positive class.

    Raises:
        ShapeError: If the sequences differ in length.
        ArgumentError: If a value is not 0 or 1.
    """
    if len(preds) != len(labels):
        raise ShapeError(f"{len(preds)} predictions for {len(labels)} labels")
    counts = ConfusionCounts()
    for pred, label in zip(preds, labels):
        if pred not in (0, 1) or label not in (0, 1):
            raise ArgumentError(f"Labels must be binary, got prediction {pred} / label {label}")
        if pred == AD and label == AD:
            counts.tp += 1
        elif pred == AD:
            counts.fp += 1
        elif label == AD:
            counts.fn += 1
        else:
            counts.tn += 1
    return counts


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _positive_class_metrics(counts: ConfusionCounts) -> ClassMetrics:
    degenerate = False
    if counts.tp + counts.fp:
        precision = counts.tp / (counts.tp + counts.fp)
    else:
        precision, degenerate = 0.0, True
    if counts.tp + counts.fn:
        recall = counts.tp / (counts.tp + counts.fn)
    else:
        recall, degenerate = 0.0, True
    if precision + recall == 0:
        degenerate = True
    accuracy = (counts.tp + counts.tn) / counts.total if counts.total else 0.0
    return ClassMetrics(
        precision=precision,
        recall=recall,
        f1=f1_score(precision, recall),
        accuracy=accuracy,
        degenerate=degenerate or counts.total == 0,
    )


def metrics(counts: ConfusionCounts) -> MetricsReport:
    """
    Accuracy (TN+TP)/N, precision TP/(TP+FP), recall TP/(TP+FN) and F1 for each
    class in turn as the positive class. Zero denominators give 0 and set the
    row's degenerate flag.
    """
    return MetricsReport(
        rows={
            NON_AD: _positive_class_metrics(counts.swapped()),
            AD: _positive_class_metrics(counts),
        },
        counts=counts,
    )


def report_rows(report: MetricsReport, model_name: str) -> list[dict]:
    """Rows shaped like the reference results table: one per class."""
    return [
        {
            "model": model_name,
            "class": CLASS_NAMES[class_index],
            "precision": row.precision,
            "recall": row.recall,
            "f1": row.f1,
            "accuracy": row.accuracy,
            "degenerate": row.degenerate,
        }
        for class_index, row in sorted(report.rows.items())
    ]
