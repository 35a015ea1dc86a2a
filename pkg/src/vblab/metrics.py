"""Continual-learning evaluation metrics.

The central object is the lower-triangular accuracy matrix: entry
``a[j][t]`` is the accuracy on task t's test split measured right after
training task j (0-indexed here; reports print 1-indexed labels).  From
it come average accuracy (mean over steps of the mean over seen tasks),
last accuracy (mean of the final row), and forgetting (mean over
non-final tasks of the drop from the best pre-final accuracy to the
final accuracy).

Retention traces record current-task accuracy at the end of every
training epoch.  Their post-saturation population variance is the
degree of forgetting: how hard retention oscillates once the task has
been learned.  Saturation defaults to the first epoch from which every
later value stays within 0.02 of the final one, pulled back if needed so
at least two epochs enter the variance.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import MetricError

SATURATION_TOLERANCE = 0.02


class AccuracyMatrix:
    """Row j holds accuracies on tasks 0..j after training task j."""

    def __init__(self, rows: list[list[float]] | None = None):
        self.rows: list[np.ndarray] = []
        for row in rows or []:
            self.add_row(row)

    def add_row(self, row) -> None:
        arr = np.asarray(row, dtype=np.float64)
        if arr.ndim != 1 or arr.size != len(self.rows) + 1:
            raise MetricError(
                f"row {len(self.rows)} must hold {len(self.rows) + 1} accuracies, got shape {arr.shape}"
            )
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise MetricError("accuracies must lie in [0, 1]")
        self.rows.append(arr)

    @property
    def n_tasks(self) -> int:
        return len(self.rows)

    def accuracy(self, after_task: int, on_task: int) -> float:
        return float(self.rows[after_task][on_task])

    def final_row(self) -> np.ndarray:
        if not self.rows:
            raise MetricError("empty accuracy matrix")
        return self.rows[-1]

    def to_lists(self) -> list[list[float]]:
        return [row.tolist() for row in self.rows]

    def __eq__(self, other) -> bool:
        if not isinstance(other, AccuracyMatrix):
            return NotImplemented
        return len(self.rows) == len(other.rows) and all(
            np.array_equal(a, b) for a, b in zip(self.rows, other.rows)
        )


def avg_accuracy(matrix: AccuracyMatrix) -> float:
    """Mean over training steps of the mean accuracy over tasks seen so far."""
    if matrix.n_tasks == 0:
        raise MetricError("average accuracy is undefined for an empty matrix")
    return float(np.mean([np.mean(row) for row in matrix.rows]))


def last_accuracy(matrix: AccuracyMatrix) -> float:
    """Mean accuracy over all tasks after the final training step."""
    return float(np.mean(matrix.final_row()))


def forgetting(matrix: AccuracyMatrix) -> float:
    """Mean over non-final tasks of (best accuracy before the final step) - (final accuracy).

    Negative values are possible when a task ends above its running best.
    Undefined for a single task.
    """
    t_count = matrix.n_tasks
    if t_count < 2:
        raise MetricError("forgetting needs at least two tasks")
    final = matrix.final_row()
    drops = []
    for t in range(t_count - 1):
        best_before_final = max(matrix.rows[j][t] for j in range(t, t_count - 1))
        drops.append(best_before_final - final[t])
    return float(np.mean(drops))


@dataclass
class RetentionTrace:
    """End-of-epoch current-task accuracies for one trained task."""

    values: np.ndarray
    saturation_epoch: int | None = None  # resolved lazily when None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.size == 0:
            raise MetricError("a retention trace must be a non-empty vector")
        if self.saturation_epoch is not None and not (
            0 <= self.saturation_epoch < self.values.size
        ):
            raise MetricError(
                f"saturation epoch {self.saturation_epoch} outside trace of length {self.values.size}"
            )

    def resolved_saturation(self) -> int:
        if self.saturation_epoch is not None:
            return self.saturation_epoch
        return saturation_epoch(self.values)


def saturation_epoch(values: np.ndarray, tolerance: float = SATURATION_TOLERANCE) -> int:
    """First epoch from which every value stays within ``tolerance`` of the final value.

    Clamped so at least two epochs remain after it, since the
    post-saturation variance needs two points.
    """
    vals = np.asarray(values, dtype=np.float64)
    if vals.size < 2:
        raise MetricError("saturation is undefined for traces shorter than 2 epochs")
    within = np.abs(vals - vals[-1]) <= tolerance
    e = vals.size - 1
    while e > 0 and within[e - 1]:
        e -= 1
    return min(e, vals.size - 2)


def degree_of_forgetting(trace: RetentionTrace) -> float:
    """Population variance of the retention values from saturation onward."""
    start = trace.resolved_saturation()
    tail = trace.values[start:]
    if tail.size < 2:
        raise MetricError(
            f"degree of forgetting needs >= 2 post-saturation epochs, got {tail.size}"
        )
    return float(np.mean((tail - np.mean(tail)) ** 2))


def retention_decay_summary(epoch_evals: list[dict[int, float]]) -> dict[int, list[float]]:
    """Per-task accuracy series over the whole run's epoch boundaries.

    ``epoch_evals`` holds, for each end-of-epoch checkpoint in training
    order, the accuracy of every task evaluated there.  The result maps
    each task to its accuracy series from its first appearance onward —
    the raw material for decay plots.
    """
    series: dict[int, list[float]] = {}
    for checkpoint in epoch_evals:
        for task_id in sorted(checkpoint):
            series.setdefault(task_id, []).append(float(checkpoint[task_id]))
    return series


@dataclass
class MetricRow:
    """One (run, metric) pair for CSV emission."""

    run_id: str
    seed: int
    metric: str
    value: float


def metrics_to_csv(rows: list[MetricRow]) -> str:
    """Render metric rows as CSV with columns run_id, seed, metric, value."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["run_id", "seed", "metric", "value"])
    for row in rows:
        writer.writerow([row.run_id, row.seed, row.metric, repr(row.value)])
    return buf.getvalue()
