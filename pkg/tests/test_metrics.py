"""Accuracy-matrix metrics, retention traces, and CSV emission."""

import math

import numpy as np
import pytest

from vblab.errors import MetricError
from vblab.metrics import (
    AccuracyMatrix,
    MetricRow,
    RetentionTrace,
    avg_accuracy,
    degree_of_forgetting,
    forgetting,
    last_accuracy,
    metrics_to_csv,
    retention_decay_summary,
    saturation_epoch,
)


def brute_force_metrics(rows: list[list[float]]) -> tuple[float, float, float]:
    """Straight-from-the-definitions recomputation used as the oracle."""
    n = len(rows)
    avg = sum(sum(r) / len(r) for r in rows) / n
    last = sum(rows[-1]) / n
    drops = []
    for t in range(n - 1):
        best = max(rows[j][t] for j in range(t, n - 1))
        drops.append(best - rows[-1][t])
    forg = sum(drops) / len(drops) if drops else float("nan")
    return avg, last, forg


def brute_force_saturation(vals: np.ndarray, tol: float = 0.02) -> int:
    candidates = [
        e
        for e in range(len(vals))
        if all(abs(v - vals[-1]) <= tol for v in vals[e:])
    ]
    return min(candidates[0], len(vals) - 2)


class TestAccuracyMatrix:
    def test_triangular_shape_enforced(self):
        m = AccuracyMatrix()
        m.add_row([0.5])
        with pytest.raises(MetricError):
            m.add_row([0.5])  # second row needs two entries
        with pytest.raises(MetricError):
            m.add_row([0.1, 0.2, 0.3])

    def test_range_enforced(self):
        with pytest.raises(MetricError):
            AccuracyMatrix([[1.5]])
        with pytest.raises(MetricError):
            AccuracyMatrix([[-0.1]])

    def test_accessors(self):
        m = AccuracyMatrix([[0.8], [0.6, 0.7]])
        assert m.n_tasks == 2
        assert m.accuracy(after_task=1, on_task=0) == 0.6
        assert m.final_row().tolist() == [0.6, 0.7]
        assert m.to_lists() == [[0.8], [0.6, 0.7]]
        assert m == AccuracyMatrix([[0.8], [0.6, 0.7]])
        assert m != AccuracyMatrix([[0.8], [0.6, 0.71]])

    def test_empty_matrix_has_no_metrics(self):
        with pytest.raises(MetricError):
            avg_accuracy(AccuracyMatrix())
        with pytest.raises(MetricError):
            last_accuracy(AccuracyMatrix())


class TestMatrixMetrics:
    def test_two_task_worked_example(self):
        m = AccuracyMatrix([[0.8], [0.6, 0.7]])
        assert math.isclose(avg_accuracy(m), 0.725, abs_tol=1e-15)
        assert math.isclose(last_accuracy(m), 0.65, abs_tol=1e-15)
        assert math.isclose(forgetting(m), 0.2, abs_tol=1e-15)

    def test_single_task(self):
        m = AccuracyMatrix([[0.9]])
        assert avg_accuracy(m) == 0.9
        assert last_accuracy(m) == 0.9
        with pytest.raises(MetricError):
            forgetting(m)

    def test_forgetting_uses_best_pre_final_accuracy(self):
        # task 0 peaks in row 1, not row 0
        m = AccuracyMatrix([[0.5], [0.9, 0.8], [0.6, 0.7, 0.9]])
        # drops: task0 max(0.5, 0.9) - 0.6 = 0.3; task1 0.8 - 0.7 = 0.1
        assert math.isclose(forgetting(m), 0.2, abs_tol=1e-15)

    def test_negative_forgetting_possible(self):
        m = AccuracyMatrix([[0.4], [0.9, 0.5]])
        assert forgetting(m) == pytest.approx(-0.5, abs=1e-15)

    def test_against_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            n = int(rng.integers(2, 7))
            rows = [rng.uniform(0, 1, size=j + 1).tolist() for j in range(n)]
            m = AccuracyMatrix(rows)
            avg, last, forg = brute_force_metrics(rows)
            assert math.isclose(avg_accuracy(m), avg, abs_tol=1e-12)
            assert math.isclose(last_accuracy(m), last, abs_tol=1e-12)
            assert math.isclose(forgetting(m), forg, abs_tol=1e-12)


class TestSaturation:
    def test_plateau_detected(self):
        assert saturation_epoch(np.array([0.2, 0.5, 0.9, 0.91, 0.9])) == 2

    def test_constant_trace_saturates_immediately(self):
        assert saturation_epoch(np.array([0.5, 0.5, 0.5])) == 0

    def test_clamped_to_leave_two_epochs(self):
        assert saturation_epoch(np.array([0.1, 0.2, 0.3, 0.9])) == 2

    def test_tolerance_is_inclusive(self):
        assert saturation_epoch(np.array([0.0, 0.58, 0.6])) == 1
        assert saturation_epoch(np.array([0.0, 0.575, 0.6])) == 1  # 0.025 > tol? no: 0.025
        # |0.575 - 0.6| = 0.025 exceeds 0.02, so only the clamp keeps it at 1

    def test_short_traces_rejected(self):
        with pytest.raises(MetricError):
            saturation_epoch(np.array([0.5]))

    def test_against_brute_force(self):
        rng = np.random.default_rng(12)
        for _ in range(300):
            n = int(rng.integers(2, 12))
            vals = rng.uniform(0, 1, size=n)
            assert saturation_epoch(vals) == brute_force_saturation(vals)


class TestRetentionTrace:
    def test_validation(self):
        with pytest.raises(MetricError):
            RetentionTrace(values=np.array([]))
        with pytest.raises(MetricError):
            RetentionTrace(values=np.array([0.5, 0.6]), saturation_epoch=2)

    def test_two_point_example(self):
        trace = RetentionTrace(values=np.array([0.8, 0.6]))
        assert trace.resolved_saturation() == 0
        assert math.isclose(degree_of_forgetting(trace), 0.01, abs_tol=1e-15)

    def test_constant_tail_has_zero_forgetting(self):
        trace = RetentionTrace(values=np.array([0.1, 0.9, 0.9, 0.9]))
        assert degree_of_forgetting(trace) == 0.0

    def test_explicit_saturation_respected(self):
        vals = np.array([0.0, 0.4, 0.5, 0.7])
        trace = RetentionTrace(values=vals, saturation_epoch=1)
        tail = vals[1:]
        assert math.isclose(
            degree_of_forgetting(trace),
            float(np.mean((tail - tail.mean()) ** 2)),
            abs_tol=1e-15,
        )

    def test_saturation_at_last_epoch_rejected(self):
        trace = RetentionTrace(values=np.array([0.1, 0.2, 0.9]), saturation_epoch=2)
        with pytest.raises(MetricError):
            degree_of_forgetting(trace)

    def test_population_variance_against_numpy(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            vals = rng.uniform(0, 1, size=int(rng.integers(2, 15)))
            trace = RetentionTrace(values=vals)
            start = brute_force_saturation(vals)
            expect = float(np.var(vals[start:]))  # ddof=0
            assert math.isclose(degree_of_forgetting(trace), expect, abs_tol=1e-12)


class TestDecaySummary:
    def test_series_grouped_by_task(self):
        evals = [{0: 0.5}, {0: 0.6}, {0: 0.55, 1: 0.7}, {0: 0.5, 1: 0.72}]
        series = retention_decay_summary(evals)
        assert series == {0: [0.5, 0.6, 0.55, 0.5], 1: [0.7, 0.72]}

    def test_empty_input(self):
        assert retention_decay_summary([]) == {}


class TestCsv:
    def test_header_and_exact_floats(self):
        rows = [
            MetricRow(run_id="abc", seed=0, metric="last_cil", value=0.65),
            MetricRow(run_id="abc", seed=1, metric="last_cil", value=1 / 3),
        ]
        text = metrics_to_csv(rows)
        lines = text.splitlines()
        assert lines[0] == "run_id,seed,metric,value"
        assert lines[1] == "abc,0,last_cil,0.65"
        assert lines[2] == f"abc,1,last_cil,{1 / 3!r}"
        # round-trips to the identical float
        assert float(lines[2].split(",")[-1]) == 1 / 3

    def test_empty_rows_is_just_the_header(self):
        assert metrics_to_csv([]) == "run_id,seed,metric,value\n"
