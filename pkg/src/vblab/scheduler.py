"""Replay scheduling: conventional batches and view batches.

A conventional schedule presents B distinct samples per step, so with T
steps per epoch a sample is next revisited after about B*T intervening
presentations.  A view-batch schedule spends the same batch budget on
B/V distinct samples, each expanded into V augmented views (one weak,
V-1 strong), which multiplies the revisit distance by V while keeping
the per-step row count at B.  To hold the total presentation budget
fixed, the epoch count is rescaled to round(base_epochs / V), floor 1.

A third mode rotates over class groups instead of stretching sample
revisits: each epoch trains only the classes of one group and repeats
them group-count times, so classes rather than samples are spaced.

Within an epoch the sample order is a fresh uniform permutation.  When
``log_presentations`` is on, the schedule records the sample_id of every
presented view in order; :func:`measure_recall_interval` turns such a
log into revisit-distance statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .augment import Augmenter, Sample
from .errors import ConfigError, EpochExhausted, MetricError

MODES = ("conventional", "view_batch_sample", "view_batch_class")


@dataclass(frozen=True)
class TrainConfig:
    """Optimisation and scheduling knobs for one run."""

    base_epochs: int
    batch_size: int
    views: int = 1
    learning_rate: float = 0.05
    momentum: float = 0.0
    weight_decay: float = 0.0
    seed: int = 0
    mode: str = "conventional"
    ssl_enabled: bool = False
    strong_aug_enabled: bool = True
    ssl_grad_through_target: bool = False
    class_groups: int = 1
    buffer_entries: int | None = None  # replay entries per batch; None = same as current entries

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.base_epochs < 1:
            raise ConfigError(f"base_epochs must be >= 1, got {self.base_epochs}")
        if self.views < 1:
            raise ConfigError(f"views must be >= 1, got {self.views}")
        if self.batch_size < self.views:
            raise ConfigError(
                f"batch_size must be >= views, got {self.batch_size} < {self.views}"
            )
        if self.learning_rate <= 0.0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.weight_decay < 0.0:
            raise ConfigError(f"weight_decay must be non-negative, got {self.weight_decay}")
        if self.mode == "conventional" and self.views != 1:
            raise ConfigError("conventional mode requires views == 1")
        if self.class_groups < 1:
            raise ConfigError(f"class_groups must be >= 1, got {self.class_groups}")
        if self.buffer_entries is not None and self.buffer_entries < 0:
            raise ConfigError(f"buffer_entries must be non-negative, got {self.buffer_entries}")


@dataclass
class ViewBatchEntry:
    """All views of one sample within one batch."""

    views: list[Sample]
    origin: str  # 'current' or 'buffer'
    source_index: int  # position in the pool the entry was drawn from


@dataclass
class ViewBatch:
    """One optimisation step's worth of views, entry-major."""

    entries: list[ViewBatchEntry]
    views_per_entry: int

    @property
    def n_entries(self) -> int:
        return len(self.entries)

    @property
    def n_rows(self) -> int:
        return sum(len(e.views) for e in self.entries)

    def feature_matrix(self) -> np.ndarray:
        return np.stack([v.features for e in self.entries for v in e.views])

    def labels(self) -> np.ndarray:
        return np.array([v.label for e in self.entries for v in e.views], dtype=np.int64)

    def row_origins(self) -> list[str]:
        return [e.origin for e in self.entries for _ in e.views]


class Schedule:
    """Stateful per-task presentation plan.

    Call :meth:`start_epoch` once per epoch, then :func:`next_view_batch`
    until it raises :class:`EpochExhausted`.
    """

    def __init__(
        self,
        mode: str,
        batch_size: int,
        views: int,
        epochs: int,
        steps_per_epoch: int,
        buffer_entries: int,
        strong_aug_enabled: bool = True,
        class_groups: int = 1,
        log_presentations: bool = False,
    ):
        self.mode = mode
        self.batch_size = batch_size
        self.views = views
        self.epochs = epochs
        self.steps_per_epoch = steps_per_epoch
        self.entries_per_batch = batch_size // views
        self.buffer_entries = buffer_entries
        self.strong_aug_enabled = strong_aug_enabled
        self.class_groups = class_groups
        self.log_presentations = log_presentations
        self.presentation_log: list[int] = []
        self._order: np.ndarray | None = None
        self._pos = 0
        self._epochs_started = 0

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "batch_size": self.batch_size,
            "views": self.views,
            "entries_per_batch": self.entries_per_batch,
            "buffer_entries": self.buffer_entries,
            "steps_per_epoch": self.steps_per_epoch,
            "epochs": self.epochs,
            "class_groups": self.class_groups,
        }

    # -- epoch state ----------------------------------------------------

    def start_epoch(self, pool: Sequence[Sample], rng: np.random.Generator) -> None:
        """Draw this epoch's presentation order over ``pool``."""
        n = len(pool)
        if n == 0:
            raise ConfigError("cannot schedule an empty pool")
        if self.mode == "view_batch_class":
            labels = sorted({s.label for s in pool})
            if self.class_groups > len(labels):
                raise ConfigError(
                    f"class_groups {self.class_groups} exceeds class count {len(labels)}"
                )
            groups = np.array_split(np.array(labels), self.class_groups)
            chosen = set(groups[self._epochs_started % self.class_groups].tolist())
            members = np.array([i for i, s in enumerate(pool) if s.label in chosen])
            # the group is repeated class_groups times, each a fresh permutation,
            # so the epoch's presentation budget stays near the pool size
            parts = [rng.permutation(members) for _ in range(self.class_groups)]
            self._order = np.concatenate(parts)
        else:
            self._order = rng.permutation(n)
        self._pos = 0
        self._epochs_started += 1

    def _take_entries(self) -> np.ndarray:
        if self._order is None:
            raise ConfigError("start_epoch must be called before next_view_batch")
        if self._pos >= len(self._order):
            raise EpochExhausted("epoch order fully consumed")
        chunk = self._order[self._pos : self._pos + self.entries_per_batch]
        self._pos += len(chunk)
        return chunk


def build_schedule(n_samples: int, cfg: TrainConfig, log_presentations: bool = False) -> Schedule:
    """Derive the presentation plan for a pool of ``n_samples`` from ``cfg``.

    The batch size must divide evenly into views (no ragged entries);
    epochs are rescaled by the view count, never below one epoch.
    """
    if n_samples < 1:
        raise ConfigError(f"n_samples must be >= 1, got {n_samples}")
    if cfg.batch_size % cfg.views != 0:
        raise ConfigError(
            f"batch_size {cfg.batch_size} is not divisible by views {cfg.views}"
        )
    entries = cfg.batch_size // cfg.views
    epochs = max(1, int(math.floor(cfg.base_epochs / cfg.views + 0.5)))
    steps = math.ceil(n_samples / entries)
    buffer_entries = entries if cfg.buffer_entries is None else cfg.buffer_entries
    return Schedule(
        mode=cfg.mode,
        batch_size=cfg.batch_size,
        views=cfg.views,
        epochs=epochs,
        steps_per_epoch=steps,
        buffer_entries=buffer_entries,
        strong_aug_enabled=cfg.strong_aug_enabled,
        class_groups=cfg.class_groups if cfg.mode == "view_batch_class" else 1,
        log_presentations=log_presentations,
    )


def build_schedule_class_variant(
    n_samples: int, cfg: TrainConfig, log_presentations: bool = False
) -> Schedule:
    """Class-rotation variant: epochs cycle over contiguous class groups."""
    if cfg.mode != "view_batch_class":
        cfg = TrainConfig(**{**cfg.__dict__, "mode": "view_batch_class"})
    return build_schedule(n_samples, cfg, log_presentations=log_presentations)


def _identity_views(sample: Sample, views: int) -> list[Sample]:
    return [sample] * views


def next_view_batch(
    schedule: Schedule,
    current_pool: Sequence[Sample],
    buffer_pool: Sequence[Sample],
    augmenter: Augmenter | None,
    rng_augment: np.random.Generator | None = None,
    rng_buffer: np.random.Generator | None = None,
) -> ViewBatch:
    """Assemble the next batch: current-pool entries plus replay entries.

    Each entry carries all V views of one sample, weak view first.
    Raises :class:`EpochExhausted` once the epoch's order is consumed.
    With ``augmenter`` None the views are the raw sample repeated (used
    by schedule-only analyses where augmentation is irrelevant).
    """
    idx = schedule._take_entries()
    if augmenter is not None and rng_augment is None:
        raise ConfigError("an augmenter was given without an augmentation rng")

    def views_of(sample: Sample) -> list[Sample]:
        if augmenter is None:
            return _identity_views(sample, schedule.views)
        return augmenter.make_views(
            sample, schedule.views, rng_augment, strong_enabled=schedule.strong_aug_enabled
        )

    entries = [
        ViewBatchEntry(views=views_of(current_pool[i]), origin="current", source_index=int(i))
        for i in idx
    ]
    if buffer_pool and schedule.buffer_entries > 0:
        if rng_buffer is None:
            raise ConfigError("a replay pool was given without a buffer rng")
        k = min(schedule.buffer_entries, len(buffer_pool))
        drawn = rng_buffer.choice(len(buffer_pool), size=k, replace=False)
        entries.extend(
            ViewBatchEntry(views=views_of(buffer_pool[i]), origin="buffer", source_index=int(i))
            for i in drawn
        )
    if schedule.log_presentations:
        for e in entries:
            schedule.presentation_log.extend([v.sample_id for v in e.views])
    return ViewBatch(entries=entries, views_per_entry=schedule.views)


@dataclass
class IntervalStats:
    """Distribution of revisit distances measured from a presentation log."""

    gaps: np.ndarray
    mean: float
    minimum: int
    maximum: int
    n_samples: int = 0  # samples contributing at least one gap

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "min": self.minimum,
            "max": self.maximum,
            "n_gaps": int(len(self.gaps)),
            "n_samples": self.n_samples,
        }


def measure_recall_interval(
    presentation_log: Sequence[int], views_per_visit: int = 1
) -> IntervalStats:
    """Revisit-distance statistics over a presentation log.

    The log lists one sample_id per presented view; a visit is a block of
    ``views_per_visit`` consecutive presentations of one sample (view
    batches emit a sample's views contiguously).  The distance between
    two successive visits of a sample is measured start-of-visit to
    start-of-visit, in presentations.  Samples seen fewer than twice are
    excluded.
    """
    log = np.asarray(presentation_log, dtype=np.int64)
    v = int(views_per_visit)
    if v < 1:
        raise ValueError(f"views_per_visit must be >= 1, got {v}")
    if log.size == 0 or log.size % v != 0:
        raise ValueError(f"log length {log.size} is not a positive multiple of {v}")
    blocks = log.reshape(-1, v)
    if not np.all(blocks == blocks[:, :1]):
        raise ValueError("log is not segmented into single-sample visits of the given width")
    visit_ids = blocks[:, 0]
    starts: dict[int, list[int]] = {}
    for pos, sid in enumerate(visit_ids):
        starts.setdefault(int(sid), []).append(pos * v)
    gaps: list[int] = []
    counted = 0
    for positions in starts.values():
        if len(positions) < 2:
            continue
        counted += 1
        gaps.extend(b - a for a, b in zip(positions, positions[1:]))
    if not gaps:
        raise MetricError("no sample was visited twice; recall intervals are undefined")
    arr = np.array(gaps, dtype=np.int64)
    return IntervalStats(
        gaps=arr,
        mean=float(np.mean(arr)),
        minimum=int(np.min(arr)),
        maximum=int(np.max(arr)),
        n_samples=counted,
    )


def drain_schedule(
    schedule: Schedule, pool: Sequence[Sample], rng: np.random.Generator
) -> int:
    """Run a schedule over a pool with no training, returning total presentations.

    Useful for budget and interval analyses; enables logging if it was
    requested on the schedule.
    """
    total = 0
    for _ in range(schedule.epochs):
        schedule.start_epoch(pool, rng)
        while True:
            try:
                batch = next_view_batch(schedule, pool, (), augmenter=None)
            except EpochExhausted:
                break
            total += batch.n_rows
    return total
