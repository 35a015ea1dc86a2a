"""Closed-form forgetting curves with spacing-dependent decay.

Retention after a recall decays as a power law, R(t) = A * (b*t + 1)^(-S),
and the decay exponent depends on how long the learner waited between
recalls: S = 1 + c * (ln(I + 1) - d)^2.  The exponent is smallest — decay
slowest — when ln(I + 1) = d, i.e. at the optimal recall interval
I* = e^d - 1; both much shorter and much longer intervals decay faster.

Curve generation follows a reset model: at each recall the retention
jumps back to A and the power-law decay restarts, producing the familiar
sawtooth.  Between recalls retention is strictly non-increasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SpacingParams:
    """Parameters of the retention law.

    initial_retention  A: retention immediately after a recall, in (0, 1]
    time_scale         b: how fast curve time accumulates, > 0
    curvature          c: penalty on deviating from the optimal interval, >= 0
    log_optimal        d: log(1 + optimal interval)
    """

    initial_retention: float = 0.95
    time_scale: float = 0.2
    curvature: float = 0.4
    log_optimal: float = math.log(4.0)

    def __post_init__(self) -> None:
        if not 0.0 < self.initial_retention <= 1.0:
            raise ValueError(f"initial_retention must lie in (0, 1], got {self.initial_retention}")
        if self.time_scale <= 0.0:
            raise ValueError(f"time_scale must be positive, got {self.time_scale}")
        if self.curvature < 0.0:
            raise ValueError(f"curvature must be non-negative, got {self.curvature}")


def decay_rate(interval: float, curvature: float, log_optimal: float) -> float:
    """Decay exponent S for a given recall interval; minimised at e^d - 1."""
    if interval < 0.0:
        raise ValueError(f"interval must be non-negative, got {interval}")
    dev = math.log(interval + 1.0) - log_optimal
    return 1.0 + curvature * dev * dev


def optimal_interval(log_optimal: float) -> float:
    """The interval that minimises the decay exponent: e^d - 1."""
    return math.exp(log_optimal) - 1.0


def retention(t, params: SpacingParams, interval: float):
    """Retention t time units after the last recall, for a given spacing."""
    s = decay_rate(interval, params.curvature, params.log_optimal)
    tt = np.asarray(t, dtype=np.float64)
    if np.any(tt < 0.0):
        raise ValueError("time must be non-negative")
    out = params.initial_retention * np.power(params.time_scale * tt + 1.0, -s)
    return float(out) if np.isscalar(t) else out


@dataclass
class CurveSeries:
    """A sampled retention curve for one recall interval."""

    interval: float
    times: np.ndarray
    values: np.ndarray
    recall_times: np.ndarray

    def area(self) -> float:
        """Trapezoidal area under the curve (a scalar summary of retention)."""
        if self.times.size < 2:
            return 0.0
        return float(np.trapezoid(self.values, self.times))

    def validate(self) -> None:
        """Check the reset-model shape: decay everywhere except at recalls."""
        if self.times.size != self.values.size:
            raise ValueError("times and values must have equal length")
        if np.any(np.diff(self.times) < 0.0):
            raise ValueError("times must be non-decreasing")
        recalls = set(np.round(self.recall_times, 12).tolist())
        diffs = np.diff(self.values)
        for i in np.flatnonzero(diffs > 1e-12):
            if round(float(self.times[i + 1]), 12) not in recalls:
                raise ValueError(
                    f"retention rose at t={self.times[i + 1]} which is not a recall time"
                )


def generate_curves(
    params: SpacingParams,
    intervals: list[float],
    horizon: float,
    repetitions: int,
    n_points: int = 1024,
) -> list[CurveSeries]:
    """Sample one sawtooth curve per recall interval over [0, horizon].

    Recalls happen at k * interval for k = 1..repetitions (those inside
    the horizon); each one resets retention to A.  After the final recall
    the curve decays freely to the horizon.
    """
    if not intervals:
        raise ValueError("intervals must be non-empty")
    if any(i <= 0.0 for i in intervals):
        raise ValueError("every recall interval must be positive")
    if horizon < 0.0:
        raise ValueError(f"horizon must be non-negative, got {horizon}")
    if repetitions < 0:
        raise ValueError(f"repetitions must be non-negative, got {repetitions}")
    if n_points < 1:
        raise ValueError(f"n_points must be >= 1, got {n_points}")

    curves = []
    for interval in intervals:
        if horizon == 0.0:
            curves.append(
                CurveSeries(
                    interval=float(interval),
                    times=np.array([0.0]),
                    values=np.array([params.initial_retention]),
                    recall_times=np.array([]),
                )
            )
            continue
        recalls = np.array(
            [k * interval for k in range(1, repetitions + 1) if k * interval < horizon]
        )
        grid = np.linspace(0.0, horizon, max(n_points, 2))
        times = np.unique(np.concatenate([grid, recalls]))
        # elapsed time since the most recent recall at or before t
        last = np.zeros_like(times)
        for r in recalls:
            last = np.where(times >= r, r, last)
        values = retention(times - last, params, interval)
        curves.append(
            CurveSeries(
                interval=float(interval),
                times=times,
                values=values,
                recall_times=recalls,
            )
        )
    return curves
