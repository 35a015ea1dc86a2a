"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from vblab.augment import Sample
from vblab.continual import Task, TaskStream


def make_samples(
    rng: np.random.Generator,
    n: int,
    dim: int,
    n_classes: int = 2,
    task_id: int = 0,
    start_id: int = 0,
    image_shape: tuple[int, int] | None = None,
) -> list[Sample]:
    return [
        Sample(
            features=rng.normal(0.0, 1.0, size=dim),
            label=int(rng.integers(0, n_classes)),
            task_id=task_id,
            sample_id=start_id + i,
            image_shape=image_shape,
        )
        for i in range(n)
    ]


def tiny_class_stream(
    rng: np.random.Generator,
    classes_per_task: int = 2,
    n_tasks: int = 2,
    train_per_class: int = 12,
    test_per_class: int = 6,
    dim: int = 6,
    separation: float = 4.0,
) -> TaskStream:
    """Well-separated gaussian blobs split into disjoint-class tasks."""
    n_classes = classes_per_task * n_tasks
    means = rng.normal(0.0, 1.0, size=(n_classes, dim))
    means *= separation / np.linalg.norm(means, axis=1, keepdims=True)
    tasks = []
    sid = 0
    for t in range(n_tasks):
        cls = tuple(range(t * classes_per_task, (t + 1) * classes_per_task))
        train, test = [], []
        for c in cls:
            for split, count in ((train, train_per_class), (test, test_per_class)):
                for _ in range(count):
                    split.append(
                        Sample(
                            features=means[c] + rng.normal(0.0, 1.0, size=dim),
                            label=c,
                            task_id=t,
                            sample_id=sid,
                        )
                    )
                    sid += 1
        tasks.append(Task(train=train, test=test, classes=cls))
    return TaskStream(tasks=tasks, protocol="CIL", n_classes=n_classes)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260822)
