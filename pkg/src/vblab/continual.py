"""Continual-learning methods over a task stream.

Methods share one training engine: every optimisation step assembles a
view batch (current-task entries plus, for rehearsal methods, replay
entries), runs one forward pass, composes the method's loss terms as
gradients at the logits, and takes one SGD step.  The supervised term is
the mean cross-entropy over each included entry's views; the optional
self-supervised term pulls every strong view's prediction toward its
entry's weak view:

    ssl = mean over entries i, strong views j of KL(p_i_weak || p_i_j)

with the weak target treated as a constant unless configured otherwise.

Implemented methods:

=========  ==========================================================
finetune   cross-entropy on the current task only
joint      re-initialise and train on the union of all tasks so far
er         cross-entropy over current plus reservoir replay entries
derpp      current CE + alpha * MSE to stored replay logits
           + beta * CE on replay labels
lwf        current CE + temperature-scaled KL to a pre-task teacher
           on previously seen classes (no buffer)
icarl      CE over current and herded exemplars + the same KL
           distillation; prediction by nearest exemplar-mean
=========  ==========================================================

Evaluation protocols differ only in which classes a prediction may
choose from: all seen classes (class-incremental), the task's own
classes (task-incremental), or the full shared class set
(domain-incremental).  Task-incremental accuracy therefore can never
fall below class-incremental accuracy on the same run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .augment import Augmenter, Sample
from .errors import ConfigError, DimensionError, MetricError
from .metrics import AccuracyMatrix, RetentionTrace
from .network import (
    LogitBatch,
    Network,
    OptimizerState,
    cross_entropy,
    kl_divergence_rows,
    mean_squared_error,
    sgd_step,
    softmax,
)
from .scheduler import Schedule, TrainConfig, ViewBatch, next_view_batch
from .seeding import RngBundle
from .errors import EpochExhausted

METHODS = ("finetune", "joint", "er", "derpp", "lwf", "icarl")
REPLAY_METHODS = ("er", "derpp", "icarl")
PROTOCOLS = ("CIL", "TIL", "DIL")


# ---------------------------------------------------------------------------
# task streams
# ---------------------------------------------------------------------------


@dataclass
class Task:
    """Train and test splits plus the classes (and optional domain) they cover."""

    train: list[Sample]
    test: list[Sample]
    classes: tuple[int, ...]
    domain_id: int | None = None


@dataclass
class TaskStream:
    """An ordered sequence of tasks under one evaluation protocol."""

    tasks: list[Task]
    protocol: str
    n_classes: int

    def __post_init__(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if not self.tasks:
            raise ConfigError("a task stream needs at least one task")
        class_sets = [set(t.classes) for t in self.tasks]
        if self.protocol in ("CIL", "TIL"):
            seen: set[int] = set()
            for i, cs in enumerate(class_sets):
                if seen & cs:
                    raise ConfigError(f"task {i} reuses classes {sorted(seen & cs)}")
                seen |= cs
        else:  # DIL: same classes in every domain
            for i, cs in enumerate(class_sets[1:], start=1):
                if cs != class_sets[0]:
                    raise ConfigError(f"domain task {i} does not share the class set of task 0")

    def classes_up_to(self, task_index: int) -> tuple[int, ...]:
        out: set[int] = set()
        for t in self.tasks[: task_index + 1]:
            out |= set(t.classes)
        return tuple(sorted(out))


# ---------------------------------------------------------------------------
# replay buffers
# ---------------------------------------------------------------------------


@dataclass
class BufferItem:
    sample: Sample
    stored_logits: np.ndarray | None = None
    herding_rank: int | None = None


class ReplayBuffer:
    """Bounded sample store, reservoir- or herding-managed."""

    POLICIES = ("reservoir", "herding")

    def __init__(self, capacity: int, policy: str = "reservoir"):
        if capacity < 0:
            raise ConfigError(f"capacity must be non-negative, got {capacity}")
        if policy not in self.POLICIES:
            raise ConfigError(f"policy must be one of {self.POLICIES}, got {policy!r}")
        self.capacity = capacity
        self.policy = policy
        self.items: list[BufferItem] = []
        self.seen_count = 0

    def __len__(self) -> int:
        return len(self.items)

    def samples(self) -> list[Sample]:
        return [item.sample for item in self.items]

    def insert(
        self, sample: Sample, rng: np.random.Generator, stored_logits: np.ndarray | None = None
    ) -> None:
        buffer_insert_reservoir(self, sample, self.seen_count, rng, stored_logits)
        self.seen_count += 1


def buffer_insert_reservoir(
    buffer: ReplayBuffer,
    sample: Sample,
    seen_count: int,
    rng: np.random.Generator,
    stored_logits: np.ndarray | None = None,
) -> None:
    """Classic reservoir step for the (seen_count + 1)-th stream element.

    While the buffer has room the sample is appended; afterwards it
    replaces a random slot with probability capacity / (seen_count + 1),
    which keeps every stream element equally likely to be retained.
    """
    if buffer.capacity == 0:
        return
    item = BufferItem(sample=sample, stored_logits=stored_logits)
    if len(buffer.items) < buffer.capacity:
        buffer.items.append(item)
        return
    slot = int(rng.integers(0, seen_count + 1))
    if slot < buffer.capacity:
        buffer.items[slot] = item


def buffer_select_herding(features: np.ndarray, m: int) -> list[int]:
    """Greedy herding: pick m rows whose running mean tracks the full mean.

    At each round the candidate that brings mean(selected so far + it)
    closest (L2) to the population mean is taken, without replacement.
    Returns original row indices in selection order; with m equal to the
    population size every row is selected and the selected mean equals
    the population mean.
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 2:
        raise DimensionError(f"herding expects a (n, d) feature matrix, got shape {feats.shape}")
    n = feats.shape[0]
    if not 0 <= m <= n:
        raise ValueError(f"m must lie in [0, {n}], got {m}")
    class_mean = np.mean(feats, axis=0)
    remaining = list(range(n))
    chosen: list[int] = []
    running_sum = np.zeros(feats.shape[1])
    for k in range(1, m + 1):
        cand = feats[remaining]
        means_with = (running_sum[None, :] + cand) / k
        dists = np.sum((class_mean[None, :] - means_with) ** 2, axis=1)
        best = int(np.argmin(dists))  # ties resolve to the lowest remaining index
        idx = remaining.pop(best)
        chosen.append(idx)
        running_sum += feats[idx]
    return chosen


@dataclass
class ClassMeans:
    """Unit-normalised per-class feature means for nearest-mean prediction."""

    means: dict[int, np.ndarray]

    def __post_init__(self) -> None:
        for cls, vec in self.means.items():
            norm = float(np.linalg.norm(vec))
            if norm > 0 and abs(norm - 1.0) > 1e-9:
                raise ValueError(f"class {cls} mean is not unit-normalised (norm {norm})")


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return x / np.where(norms > 0.0, norms, 1.0)


def class_means_from_buffer(net: Network, buffer: ReplayBuffer) -> ClassMeans:
    """Recompute exemplar means with the network's current features."""
    by_class: dict[int, list[Sample]] = {}
    for item in buffer.items:
        by_class.setdefault(item.sample.label, []).append(item.sample)
    means: dict[int, np.ndarray] = {}
    for cls in sorted(by_class):
        feats = net.features(np.stack([s.features for s in by_class[cls]]))
        mean = np.mean(_normalize_rows(feats), axis=0)
        norm = float(np.linalg.norm(mean))
        means[cls] = mean / norm if norm > 0.0 else mean
    return ClassMeans(means)


def classify_nme(class_means: ClassMeans, feature: np.ndarray, allowed: Sequence[int] | None = None) -> int:
    """Nearest-exemplar-mean prediction; ties go to the lowest class id."""
    if not class_means.means:
        raise ValueError("no class means available")
    f = np.asarray(feature, dtype=np.float64)
    norm = float(np.linalg.norm(f))
    if norm > 0.0:
        f = f / norm
    candidates = sorted(class_means.means if allowed is None else set(allowed) & set(class_means.means))
    if not candidates:
        raise ValueError("no admissible class has a mean")
    best_cls, best_dist = -1, np.inf
    for cls in candidates:
        dist = float(np.sum((class_means.means[cls] - f) ** 2))
        if dist < best_dist:
            best_cls, best_dist = cls, dist
    return best_cls


# ---------------------------------------------------------------------------
# method specification and loss terms
# ---------------------------------------------------------------------------


@dataclass
class MethodSpec:
    """A continual method plus its training configuration."""

    name: str
    train: TrainConfig
    alpha: float = 0.5  # derpp: weight of the stored-logit MSE term
    beta: float = 0.5  # derpp: weight of the replay cross-entropy term
    kd_temperature: float = 2.0  # lwf/icarl: distillation temperature

    def __post_init__(self) -> None:
        if self.name not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.name!r}")
        if self.kd_temperature < 1.0:
            raise ConfigError(f"kd_temperature must be >= 1, got {self.kd_temperature}")
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ConfigError("alpha and beta must be non-negative")
        if self.name != "derpp" and (self.alpha, self.beta) != (0.5, 0.5):
            raise ConfigError("alpha and beta are derpp-only knobs; leave them at default")

    @property
    def uses_buffer(self) -> bool:
        return self.name in REPLAY_METHODS


def loss_supervised(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean cross-entropy over every included view row."""
    if probs.shape[0] == 0:
        raise ValueError("loss_supervised needs at least one row")
    return cross_entropy(probs, labels)


def loss_ssl(probs: np.ndarray, views_per_entry: int) -> float:
    """Mean KL from each entry's weak view to each of its strong views.

    ``probs`` is entry-major: rows [k*V, (k+1)*V) are entry k's views,
    weak first.  With one view per entry there are no strong views and
    the term is inactive (0).
    """
    v = int(views_per_entry)
    if v < 1:
        raise ValueError(f"views_per_entry must be >= 1, got {v}")
    if probs.shape[0] % v != 0:
        raise DimensionError(f"{probs.shape[0]} rows do not split into entries of {v} views")
    if v == 1:
        return 0.0
    grouped = probs.reshape(-1, v, probs.shape[1])
    n_entries = grouped.shape[0]
    weak = np.repeat(grouped[:, 0, :], v - 1, axis=0)
    strong = grouped[:, 1:, :].reshape(-1, probs.shape[1])
    return float(np.sum(kl_divergence_rows(weak, strong)) / (n_entries * (v - 1)))


def loss_derpp(
    current: LogitBatch,
    replay: LogitBatch,
    stored_logits: np.ndarray,
    alpha: float,
    beta: float,
) -> float:
    """Current CE + alpha * MSE(replay logits, stored logits) + beta * replay CE."""
    value = cross_entropy(softmax(current.logits), current.labels)
    if replay.n_rows:
        value += alpha * mean_squared_error(replay.logits, stored_logits)
        value += beta * cross_entropy(softmax(replay.logits), replay.labels)
    return float(value)


def loss_lwf(student_logits: np.ndarray, teacher_logits: np.ndarray, temperature: float) -> float:
    """Distillation penalty: T^2 * mean KL(teacher softened || student softened).

    Callers pass logits already restricted to the distilled classes.
    At temperature 1 this is the plain mean KL of the softmaxes.
    """
    if temperature < 1.0:
        raise ConfigError(f"temperature must be >= 1, got {temperature}")
    p_teacher = softmax(teacher_logits / temperature)
    p_student = softmax(student_logits / temperature)
    return float(temperature**2 * np.mean(kl_divergence_rows(p_teacher, p_student)))


# ---------------------------------------------------------------------------
# the shared training step
# ---------------------------------------------------------------------------


@dataclass
class StepRecord:
    """Loss components of one optimisation step."""

    total: float
    supervised: float
    ssl: float
    replay_mse: float
    replay_ce: float
    distill: float
    n_rows: int
    ssl_active: bool


def _one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], n_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def _step_losses(
    net: Network,
    batch: ViewBatch,
    method: MethodSpec,
    old_classes: tuple[int, ...],
    teacher: Network | None,
    buffer_items: list[BufferItem],
) -> tuple[StepRecord, np.ndarray]:
    """Forward one view batch and compose loss value plus logit gradient."""
    cfg = method.train
    v = batch.views_per_entry
    x = batch.feature_matrix()
    y = batch.labels()
    logits = net.forward(x, labels=y).logits
    probs = softmax(logits)
    n_classes = logits.shape[1]
    dlogits = np.zeros_like(logits)

    n_current = sum(1 for e in batch.entries if e.origin == "current")
    cur_rows = np.arange(n_current * v)
    buf_rows = np.arange(n_current * v, batch.n_rows)

    # supervised term: derpp and lwf restrict it to current entries,
    # the rest train on every included entry
    sup_rows = cur_rows if method.name in ("derpp", "lwf") else np.arange(batch.n_rows)
    sup = cross_entropy(probs[sup_rows], y[sup_rows])
    dlogits[sup_rows] += (probs[sup_rows] - _one_hot(y[sup_rows], n_classes)) / len(sup_rows)

    # one-to-many consistency across each entry's views
    ssl_active = bool(cfg.ssl_enabled and v >= 2)
    ssl = 0.0
    if ssl_active:
        ssl = loss_ssl(probs, v)
        grouped = probs.reshape(-1, v, n_classes)
        n_entries = grouped.shape[0]
        scale = 1.0 / (n_entries * (v - 1))
        weak = grouped[:, :1, :]
        strong = grouped[:, 1:, :]
        dstrong = (strong - weak) * scale
        dgrouped = np.zeros_like(grouped)
        dgrouped[:, 1:, :] = dstrong
        if cfg.ssl_grad_through_target:
            # gradient through the weak-view target as well
            logc = np.log(np.maximum(grouped, 1e-12))
            kl = np.sum(weak * (logc[:, :1, :] - logc[:, 1:, :]), axis=2, keepdims=True)
            dweak = weak * ((logc[:, :1, :] - logc[:, 1:, :]) - kl)
            dgrouped[:, :1, :] += np.sum(dweak, axis=1, keepdims=True) * scale
        dlogits += dgrouped.reshape(-1, n_classes)

    replay_mse = 0.0
    replay_ce = 0.0
    if method.name == "derpp" and buf_rows.size:
        stored = np.concatenate(
            [
                np.repeat(buffer_items[e.source_index].stored_logits[None, :], v, axis=0)
                for e in batch.entries
                if e.origin == "buffer"
            ]
        )
        zb = logits[buf_rows]
        replay_mse = mean_squared_error(zb, stored)
        dlogits[buf_rows] += method.alpha * 2.0 * (zb - stored) / zb.size
        replay_ce = cross_entropy(probs[buf_rows], y[buf_rows])
        dlogits[buf_rows] += (
            method.beta * (probs[buf_rows] - _one_hot(y[buf_rows], n_classes)) / buf_rows.size
        )

    distill = 0.0
    if method.name in ("lwf", "icarl") and teacher is not None and old_classes:
        kd_rows = cur_rows if method.name == "lwf" else np.arange(batch.n_rows)
        cols = np.array(old_classes, dtype=np.int64)
        tau = method.kd_temperature
        teacher_logits = teacher.forward(x[kd_rows]).logits[:, cols]
        student_old = logits[np.ix_(kd_rows, cols)]
        distill = loss_lwf(student_old, teacher_logits, tau)
        p_t = softmax(teacher_logits / tau)
        p_s = softmax(student_old / tau)
        dlogits[np.ix_(kd_rows, cols)] += (tau / kd_rows.size) * (p_s - p_t)
        # the teacher pass overwrote nothing on net, but net's cache must
        # describe the full batch for backward; it still does (one forward).

    total = sup + ssl + method.alpha * replay_mse + method.beta * replay_ce + distill
    record = StepRecord(
        total=float(total),
        supervised=float(sup),
        ssl=float(ssl),
        replay_mse=float(replay_mse),
        replay_ce=float(replay_ce),
        distill=float(distill),
        n_rows=batch.n_rows,
        ssl_active=ssl_active,
    )
    return record, dlogits


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _masked_argmax(logits: np.ndarray, allowed: Sequence[int], n_classes: int) -> np.ndarray:
    mask = np.full(n_classes, -np.inf)
    mask[list(allowed)] = 0.0
    return np.argmax(logits + mask[None, :], axis=1)


def evaluate_task(
    net: Network,
    task: Task,
    allowed: Sequence[int],
    n_classes: int,
    classifier: str = "logits",
    class_means: ClassMeans | None = None,
) -> float:
    """Top-1 accuracy on a task's test split with predictions restricted to ``allowed``."""
    if not task.test:
        raise MetricError("task has an empty test split")
    x = np.stack([s.features for s in task.test])
    y = np.array([s.label for s in task.test])
    if classifier == "logits":
        preds = _masked_argmax(net.forward(x).logits, allowed, n_classes)
    elif classifier == "nme":
        if class_means is None:
            raise ValueError("nme evaluation needs class means")
        feats = net.features(x)
        preds = np.array([classify_nme(class_means, f, allowed) for f in feats])
    else:
        raise ValueError(f"unknown classifier {classifier!r}")
    return float(np.mean(preds == y))


def evaluate(
    net: Network,
    stream: TaskStream,
    protocol: str,
    upto_task: int,
    classifier: str = "logits",
    buffer: ReplayBuffer | None = None,
) -> np.ndarray:
    """Accuracy on every task 0..upto_task under the named protocol.

    CIL admits all classes seen so far, TIL only each task's own
    classes, DIL the full shared class set.
    """
    if protocol not in PROTOCOLS:
        raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    if not 0 <= upto_task < len(stream.tasks):
        raise ValueError(f"upto_task {upto_task} outside stream of {len(stream.tasks)} tasks")
    class_means = None
    if classifier == "nme":
        if buffer is None or not buffer.items:
            raise ValueError("nme evaluation needs a non-empty exemplar buffer")
        class_means = class_means_from_buffer(net, buffer)
    seen = stream.classes_up_to(upto_task)
    all_classes = tuple(range(stream.n_classes))
    row = np.zeros(upto_task + 1)
    for t in range(upto_task + 1):
        if protocol == "CIL":
            allowed: Sequence[int] = seen
        elif protocol == "TIL":
            allowed = stream.tasks[t].classes
        else:
            allowed = all_classes
        row[t] = evaluate_task(
            net, stream.tasks[t], allowed, stream.n_classes, classifier, class_means
        )
    return row


# ---------------------------------------------------------------------------
# per-task training
# ---------------------------------------------------------------------------


@dataclass
class TaskTrainResult:
    retention: RetentionTrace
    step_records: list[StepRecord] = field(default_factory=list)


def _check_compat(method: MethodSpec, buffer: ReplayBuffer | None) -> None:
    if method.uses_buffer:
        if buffer is None or buffer.capacity == 0:
            raise ConfigError(f"{method.name} needs a replay buffer with positive capacity")
        if method.name == "icarl" and buffer.policy != "herding":
            raise ConfigError("icarl requires the herding buffer policy")
        if method.name in ("er", "derpp") and buffer.policy != "reservoir":
            raise ConfigError(f"{method.name} requires the reservoir buffer policy")
    elif buffer is not None and buffer.capacity > 0:
        raise ConfigError(f"{method.name} does not use a replay buffer; set capacity 0")


def _reinitialize_in_place(net: Network, rng: np.random.Generator) -> None:
    fresh = Network.initialize(net.layer_dims, net.activation, rng=rng, seed=net.seed)
    net.weights = fresh.weights
    net.biases = fresh.biases
    net.zero_grad()
    net._cache = None


def _current_task_accuracy(net: Network, stream: TaskStream, task_index: int) -> float:
    task = stream.tasks[task_index]
    allowed = task.classes if stream.protocol != "DIL" else tuple(range(stream.n_classes))
    return evaluate_task(net, task, allowed, stream.n_classes)


def _rebuild_icarl_buffer(
    net: Network, buffer: ReplayBuffer, task: Task, seen_classes: tuple[int, ...]
) -> None:
    per_class = buffer.capacity // len(seen_classes)
    if per_class < 1:
        raise ConfigError(
            f"buffer capacity {buffer.capacity} cannot hold {len(seen_classes)} classes"
        )
    kept: dict[int, list[BufferItem]] = {}
    for item in buffer.items:  # shrink old classes, preserving herding order
        kept.setdefault(item.sample.label, [])
        if len(kept[item.sample.label]) < per_class:
            kept[item.sample.label].append(item)
    new_by_class: dict[int, list[Sample]] = {}
    for s in task.train:
        new_by_class.setdefault(s.label, []).append(s)
    for cls in sorted(new_by_class):
        members = new_by_class[cls]
        feats = _normalize_rows(net.features(np.stack([s.features for s in members])))
        order = buffer_select_herding(feats, min(per_class, len(members)))
        kept[cls] = [
            BufferItem(sample=members[i], herding_rank=rank) for rank, i in enumerate(order)
        ]
    buffer.items = [item for cls in sorted(kept) for item in kept[cls]]


def _update_buffer_after_task(
    net: Network, buffer: ReplayBuffer, method: MethodSpec, stream: TaskStream, task_index: int, rng: np.random.Generator
) -> None:
    task = stream.tasks[task_index]
    if method.name == "er":
        for s in task.train:
            buffer.insert(s, rng)
    elif method.name == "derpp":
        logits = net.forward(np.stack([s.features for s in task.train])).logits
        for s, z in zip(task.train, logits):
            buffer.insert(s, rng, stored_logits=z.copy())
    elif method.name == "icarl":
        _rebuild_icarl_buffer(net, buffer, task, stream.classes_up_to(task_index))


def train_task(
    net: Network,
    stream: TaskStream,
    task_index: int,
    method: MethodSpec,
    schedule: Schedule,
    buffer: ReplayBuffer | None,
    augmenter: Augmenter | None,
    rngs: RngBundle,
    record_steps: bool = False,
    epoch_hook: Callable[[int, Network], None] | None = None,
) -> TaskTrainResult:
    """Train one task in place and return its retention trace.

    The replay pool is frozen at task entry and the buffer is updated
    only after the task finishes.  The retention trace holds the
    current task's (task-restricted) test accuracy at the end of every
    epoch.  ``epoch_hook`` runs after each epoch's retention measurement
    — the hook the runner uses to also track older tasks' decay.
    """
    cfg = method.train
    _check_compat(method, buffer)
    if not 0 <= task_index < len(stream.tasks):
        raise ValueError(f"task_index {task_index} outside stream of {len(stream.tasks)} tasks")
    if schedule.views != cfg.views or schedule.batch_size != cfg.batch_size:
        raise ConfigError("schedule does not match the method's training configuration")

    if method.name == "joint":
        pool: list[Sample] = [s for t in stream.tasks[: task_index + 1] for s in t.train]
        _reinitialize_in_place(net, rngs.init)
    else:
        pool = list(stream.tasks[task_index].train)

    replay_items = list(buffer.items) if (buffer is not None and method.uses_buffer) else []
    replay_samples = [item.sample for item in replay_items]
    old_classes = stream.classes_up_to(task_index - 1) if task_index > 0 else ()
    teacher = net.snapshot() if (method.name in ("lwf", "icarl") and old_classes) else None

    opt = OptimizerState.for_network(net, cfg.learning_rate, cfg.momentum, cfg.weight_decay)
    retention = []
    steps: list[StepRecord] = []
    for epoch in range(schedule.epochs):
        schedule.start_epoch(pool, rngs.schedule)
        while True:
            try:
                batch = next_view_batch(
                    schedule, pool, replay_samples, augmenter, rngs.augment, rngs.buffer
                )
            except EpochExhausted:
                break
            record, dlogits = _step_losses(net, batch, method, old_classes, teacher, replay_items)
            net.backward(dlogits)
            sgd_step(net, opt)
            if record_steps:
                steps.append(record)
        retention.append(_current_task_accuracy(net, stream, task_index))
        if epoch_hook is not None:
            epoch_hook(epoch, net)

    if buffer is not None and method.uses_buffer:
        _update_buffer_after_task(net, buffer, method, stream, task_index, rngs.buffer)
    trace = RetentionTrace(values=np.array(retention))
    return TaskTrainResult(retention=trace, step_records=steps)
