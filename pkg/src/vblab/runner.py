"""Run orchestration: configs in, run records and report tables out.

``execute_run`` drives one seed through the full pipeline — synthesise
the task stream, build the network/buffer/augmenter, train every task
under the configured schedule, evaluate after each task — and packs the
results into a :class:`RunRecord`.  Records are plain JSON and fully
reproducible: the same config and seed produce byte-identical records
(wall time aside), which is what makes sweeps and reports trustworthy.

Class-incremental streams are always evaluated under both the
class-incremental and task-incremental protocols (one run, two masks);
domain streams under the domain protocol.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .augment import AugPolicy, Augmenter
from .config import canonical_json, config_hash, validate_config
from .continual import MethodSpec, ReplayBuffer, TaskStream, evaluate, train_task
from .datasets import generate_dataset
from .errors import ConfigError, MetricError, PairingError
from .metrics import (
    AccuracyMatrix,
    RetentionTrace,
    avg_accuracy,
    degree_of_forgetting,
    forgetting,
    last_accuracy,
    retention_decay_summary,
)
from .network import Network
from .scheduler import TrainConfig, build_schedule, measure_recall_interval
from .seeding import RngBundle

# sweep axes: public name -> path into the merged config dict
AXIS_PATHS = {
    "V": ("train", "views"),
    "views": ("train", "views"),
    "lr": ("train", "learning_rate"),
    "capacity": ("buffer", "capacity"),
    "base_epochs": ("train", "base_epochs"),
    "separation": ("dataset", "params", "separation"),
}

# fields ignored when pairing a view-batch run with its conventional baseline
_PAIRING_EXEMPT = ("mode", "views", "ssl_enabled", "strong_aug_enabled", "class_groups")


@dataclass
class RunRecord:
    """Everything one (config, seed) run produced."""

    config: dict
    config_hash: str
    seed: int
    protocols: list[str]
    accuracy: dict[str, list[list[float]]]
    metrics: dict[str, float | None]
    retention: list[list[float]]
    saturation: list[int | None]
    schedule: dict
    recall_intervals: list[dict | None] | None
    decay: dict[str, list[float]] | None
    ssl_active: bool
    wall_time_s: float

    def to_dict(self, include_wall_time: bool = True) -> dict:
        out = {
            "config": self.config,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "protocols": self.protocols,
            "accuracy": self.accuracy,
            "metrics": self.metrics,
            "retention": self.retention,
            "saturation": self.saturation,
            "schedule": self.schedule,
            "recall_intervals": self.recall_intervals,
            "decay": self.decay,
            "ssl_active": self.ssl_active,
        }
        if include_wall_time:
            out["wall_time_s"] = self.wall_time_s
        return out

    def to_json(self, include_wall_time: bool = True) -> str:
        return json.dumps(self.to_dict(include_wall_time), sort_keys=True, indent=2) + "\n"

    @property
    def primary_protocol(self) -> str:
        return self.config["stream"]["protocol"].lower()


def build_train_config(config: dict, seed: int) -> TrainConfig:
    t = config["train"]
    return TrainConfig(
        base_epochs=t["base_epochs"],
        batch_size=t["batch_size"],
        views=t["views"],
        learning_rate=t["learning_rate"],
        momentum=t["momentum"],
        weight_decay=t["weight_decay"],
        seed=seed,
        mode=t["mode"],
        ssl_enabled=t["ssl_enabled"],
        strong_aug_enabled=t["strong_aug_enabled"],
        ssl_grad_through_target=t["ssl_grad_through_target"],
        class_groups=t["class_groups"],
        buffer_entries=t["buffer_entries"],
    )


def build_method(config: dict, seed: int) -> MethodSpec:
    m = config["method"]
    return MethodSpec(
        name=m["name"],
        train=build_train_config(config, seed),
        alpha=m["alpha"],
        beta=m["beta"],
        kd_temperature=m["kd_temperature"],
    )


def build_augmenter(config: dict, stream: TaskStream) -> Augmenter:
    """Combine the config's augment section with data-kind defaults."""
    probe = stream.tasks[0].train[0]
    dim = probe.features.size
    if probe.image_shape is not None:
        weak_defaults = {"flip_prob": 0.5}
        strong_defaults = {
            "shift_max": 2,
            "erase_size": max(2, min(probe.image_shape) // 7),
            "noise_sigma": 0.05,
        }
    else:
        weak_defaults = {"noise_sigma": 0.1}
        strong_defaults = {"erase_size": max(1, dim // 8), "noise_sigma": 0.3}
    section = config.get("augment", {}) or {}
    weak = {**weak_defaults, **section.get("weak", {})}
    strong = {**strong_defaults, **section.get("strong", {})}
    return Augmenter(
        AugPolicy(kind="weak", **weak),
        AugPolicy(kind="strong", **strong),
        image_shape=probe.image_shape,
    )


def _build_buffer(config: dict) -> ReplayBuffer | None:
    b = config["buffer"]
    if b["capacity"] == 0:
        return None
    return ReplayBuffer(capacity=b["capacity"], policy=b["policy"])


def _protocols_for(stream: TaskStream) -> list[str]:
    return ["DIL"] if stream.protocol == "DIL" else ["CIL", "TIL"]


def execute_run(config: dict, seed: int) -> RunRecord:
    """Run one seed of a validated (merged) config end to end."""
    started = time.perf_counter()
    stream = generate_dataset(config["dataset"], config["stream"])
    rngs = RngBundle.for_seed(seed)
    method = build_method(config, seed)
    cfg = method.train
    input_dim = stream.tasks[0].train[0].features.size
    layer_dims = [input_dim] + list(config["network"]["hidden"]) + [stream.n_classes]
    net = Network.initialize(layer_dims, config["network"]["activation"], rng=rngs.init, seed=seed)
    buffer = _build_buffer(config)
    augmenter = build_augmenter(config, stream)
    diagnostics = config["diagnostics"]
    protocols = _protocols_for(stream)
    classifier = "nme" if method.name == "icarl" else "logits"

    matrices = {p: AccuracyMatrix() for p in protocols}
    traces: list[RetentionTrace] = []
    saturations: list[int | None] = []
    intervals: list[dict | None] = []
    steps_per_task: list[int] = []
    epoch_evals: list[dict[int, float]] = []
    schedule_summary: dict = {}

    for task_index in range(len(stream.tasks)):
        if method.name == "joint":
            pool_size = sum(len(t.train) for t in stream.tasks[: task_index + 1])
        else:
            pool_size = len(stream.tasks[task_index].train)
        schedule = build_schedule(
            pool_size, cfg, log_presentations=diagnostics["log_presentations"]
        )
        if task_index == 0:
            schedule_summary = schedule.summary()

        hook = None
        if diagnostics["track_decay"]:
            def hook(epoch: int, current_net: Network, _t=task_index) -> None:
                row = evaluate(current_net, stream, stream.protocol, _t, "logits", None)
                epoch_evals.append({t: float(a) for t, a in enumerate(row)})

        result = train_task(
            net, stream, task_index, method, schedule, buffer, augmenter, rngs,
            record_steps=False, epoch_hook=hook,
        )
        traces.append(result.retention)
        # saturation needs two epochs; heavy view rescaling can leave one
        saturations.append(
            result.retention.resolved_saturation()
            if result.retention.values.size >= 2
            else None
        )
        steps_per_task.append(schedule.steps_per_epoch * schedule.epochs)
        if diagnostics["log_presentations"]:
            try:
                stats = measure_recall_interval(schedule.presentation_log, schedule.views)
                intervals.append(stats.to_dict())
            except MetricError:
                intervals.append(None)
        for p in protocols:
            matrices[p].add_row(
                evaluate(net, stream, p, task_index, classifier, buffer).tolist()
            )

    metrics: dict[str, float | None] = {}
    for p in protocols:
        key = p.lower()
        matrix = matrices[p]
        metrics[f"avg_{key}"] = avg_accuracy(matrix)
        metrics[f"last_{key}"] = last_accuracy(matrix)
        metrics[f"forgetting_{key}"] = forgetting(matrix) if matrix.n_tasks >= 2 else None
    if "last_cil" in metrics and "last_til" in metrics:
        metrics["avg_cil_til"] = 0.5 * (metrics["last_cil"] + metrics["last_til"])
    dof_values = [
        degree_of_forgetting(trace) for trace in traces if trace.values.size >= 2
    ]
    metrics["degree_of_forgetting"] = float(np.mean(dof_values)) if dof_values else None

    schedule_summary["steps_per_task"] = steps_per_task
    decay = None
    if diagnostics["track_decay"]:
        decay = {str(k): v for k, v in retention_decay_summary(epoch_evals).items()}

    return RunRecord(
        config=config,
        config_hash=config_hash(config),
        seed=seed,
        protocols=[p.lower() for p in protocols],
        accuracy={p.lower(): matrices[p].to_lists() for p in protocols},
        metrics=metrics,
        retention=[trace.values.tolist() for trace in traces],
        saturation=saturations,
        schedule=schedule_summary,
        recall_intervals=intervals if diagnostics["log_presentations"] else None,
        decay=decay,
        ssl_active=bool(cfg.ssl_enabled and cfg.views >= 2),
        wall_time_s=time.perf_counter() - started,
    )


def run(config: dict) -> list[RunRecord]:
    """Execute every seed listed in the config."""
    config = validate_config(config)
    return [execute_run(config, seed) for seed in config["seeds"]]


def set_axis_value(config: dict, axis: str, value) -> dict:
    if axis not in AXIS_PATHS:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {sorted(AXIS_PATHS)}")
    clone = copy.deepcopy(config)
    node = clone
    *parents, leaf = AXIS_PATHS[axis]
    for part in parents:
        node = node.setdefault(part, {})
    node[leaf] = value
    return clone


@dataclass
class SweepResult:
    axis: str
    values: list
    records: dict = field(default_factory=dict)  # value -> list[RunRecord]

    def all_records(self) -> list["RunRecord"]:
        return [r for v in self.values for r in self.records[v]]


def sweep(config: dict, axis: str, values: list) -> SweepResult:
    """Run the config once per axis value (all seeds each time)."""
    config = validate_config(config)
    if not values:
        raise ConfigError("sweep needs at least one axis value")
    result = SweepResult(axis=axis, values=list(values))
    for value in values:
        clone = set_axis_value(config, axis, value)
        clone = validate_config(clone)
        result.records[value] = [execute_run(clone, seed) for seed in clone["seeds"]]
    return result


def aggregate(records: list[RunRecord]) -> dict[str, dict[str, float]]:
    """Per-metric mean and sample standard deviation across records."""
    if not records:
        return {}
    keys = sorted({k for r in records for k in r.metrics if r.metrics[k] is not None})
    out = {}
    for key in keys:
        vals = np.array([r.metrics[key] for r in records if r.metrics.get(key) is not None])
        std = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
        out[key] = {"mean": float(np.mean(vals)), "std": std, "n": int(vals.size)}
    return out


def _pairing_key(config: dict) -> str:
    trimmed = copy.deepcopy(config)
    for fld in _PAIRING_EXEMPT:
        trimmed["train"].pop(fld, None)
    trimmed.pop("output_dir", None)
    trimmed.pop("diagnostics", None)
    return canonical_json(trimmed)


def report(records: list[RunRecord]) -> str:
    """Summary CSV: one row per config, with a last-accuracy delta against
    the matching conventional baseline where exactly one exists."""
    header = [
        "config_hash", "method", "mode", "views", "ssl", "strong_aug", "class_groups",
        "buffer_capacity", "protocol", "n_seeds",
        "avg_mean", "avg_std", "last_mean", "last_std",
        "forgetting_mean", "forgetting_std",
        "degree_of_forgetting_mean", "degree_of_forgetting_std",
        "avg_cil_til_mean", "avg_cil_til_std", "delta_last_vs_baseline",
    ]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    if not records:
        return buf.getvalue()

    groups: dict[str, list[RunRecord]] = {}
    for rec in records:
        groups.setdefault(rec.config_hash, []).append(rec)

    baselines: dict[str, list[str]] = {}
    for chash, recs in groups.items():
        cfg = recs[0].config
        if cfg["train"]["mode"] == "conventional":
            baselines.setdefault(_pairing_key(cfg), []).append(chash)

    def last_key(rec: RunRecord) -> str:
        return f"last_{rec.primary_protocol}"

    rows = []
    for chash in sorted(groups):
        recs = groups[chash]
        cfg = recs[0].config
        agg = aggregate(recs)
        primary = recs[0].primary_protocol

        def stat(name: str, field_: str) -> str:
            entry = agg.get(name)
            return repr(entry[field_]) if entry else ""

        delta = ""
        if cfg["train"]["mode"] != "conventional":
            key = _pairing_key(cfg)
            matches = baselines.get(key, [])
            if len(matches) > 1:
                raise PairingError(
                    f"config {chash} matches {len(matches)} distinct baselines; cannot form a delta"
                )
            if len(matches) == 1:
                base_agg = aggregate(groups[matches[0]])
                mine = agg.get(f"last_{primary}")
                theirs = base_agg.get(f"last_{primary}")
                if mine and theirs:
                    delta = repr(mine["mean"] - theirs["mean"])
        rows.append([
            chash,
            cfg["method"]["name"],
            cfg["train"]["mode"],
            cfg["train"]["views"],
            cfg["train"]["ssl_enabled"],
            cfg["train"]["strong_aug_enabled"],
            cfg["train"]["class_groups"],
            cfg["buffer"]["capacity"],
            primary,
            len(recs),
            stat(f"avg_{primary}", "mean"), stat(f"avg_{primary}", "std"),
            stat(f"last_{primary}", "mean"), stat(f"last_{primary}", "std"),
            stat(f"forgetting_{primary}", "mean"), stat(f"forgetting_{primary}", "std"),
            stat("degree_of_forgetting", "mean"), stat("degree_of_forgetting", "std"),
            stat("avg_cil_til", "mean"), stat("avg_cil_til", "std"),
            delta,
        ])
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def record_filename(record: RunRecord) -> str:
    return f"record-{record.config_hash}-seed{record.seed}.json"


def write_records(records: list[RunRecord], out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for rec in records:
        path = os.path.join(out_dir, record_filename(rec))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(rec.to_json(include_wall_time=True))
        paths.append(path)
    return paths


def load_records(directory: str) -> list[RunRecord]:
    """Read record JSONs back (for reporting)."""
    records = []
    for name in sorted(os.listdir(directory)):
        if not (name.startswith("record-") and name.endswith(".json")):
            continue
        with open(os.path.join(directory, name), "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        records.append(
            RunRecord(
                config=payload["config"],
                config_hash=payload["config_hash"],
                seed=payload["seed"],
                protocols=payload["protocols"],
                accuracy=payload["accuracy"],
                metrics=payload["metrics"],
                retention=payload["retention"],
                saturation=payload["saturation"],
                schedule=payload["schedule"],
                recall_intervals=payload["recall_intervals"],
                decay=payload["decay"],
                ssl_active=payload["ssl_active"],
                wall_time_s=payload.get("wall_time_s", 0.0),
            )
        )
    return records
