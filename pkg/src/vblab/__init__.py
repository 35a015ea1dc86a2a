"""vblab — a small continual-learning laboratory.

The package trains plain feed-forward networks on task streams and
compares replay schedules: conventional one-view epochs against
view-batch schedules that trade epoch count for repeated augmented
views, widening the gap between visits to the same sample.  Everything
is numpy + stdlib, seeded end to end, and drivable from JSON configs
via the ``vblab`` command.
"""

from .augment import AugPolicy, Augmenter, Sample
from .config import (
    DEFAULTS,
    canonical_json,
    config_hash,
    load_config,
    parse_config,
    validate_config,
)
from .continual import (
    METHODS,
    PROTOCOLS,
    ClassMeans,
    MethodSpec,
    ReplayBuffer,
    Task,
    TaskStream,
    buffer_insert_reservoir,
    buffer_select_herding,
    class_means_from_buffer,
    classify_nme,
    evaluate,
    evaluate_task,
    loss_derpp,
    loss_lwf,
    loss_ssl,
    loss_supervised,
    train_task,
)
from .datasets import GENERATORS, generate_dataset, load_idx, write_idx
from .errors import (
    ConfigError,
    DataError,
    DimensionError,
    EpochExhausted,
    MaskError,
    MetricError,
    PairingError,
    StateError,
    VblabError,
)
from .metrics import (
    AccuracyMatrix,
    RetentionTrace,
    avg_accuracy,
    degree_of_forgetting,
    forgetting,
    last_accuracy,
    metrics_to_csv,
    retention_decay_summary,
    saturation_epoch,
)
from .network import (
    LogitBatch,
    Network,
    OptimizerState,
    cross_entropy,
    kl_divergence,
    kl_divergence_rows,
    mean_squared_error,
    sgd_step,
    softmax,
)
from .runner import (
    AXIS_PATHS,
    RunRecord,
    aggregate,
    execute_run,
    load_records,
    report,
    run,
    sweep,
    write_records,
)
from .scheduler import (
    MODES,
    IntervalStats,
    Schedule,
    TrainConfig,
    ViewBatch,
    ViewBatchEntry,
    build_schedule,
    build_schedule_class_variant,
    drain_schedule,
    measure_recall_interval,
    next_view_batch,
)
from .seeding import RngBundle, substream
from .spacing import (
    CurveSeries,
    SpacingParams,
    decay_rate,
    generate_curves,
    optimal_interval,
    retention,
)

__version__ = "0.1.0"

__all__ = [
    "AXIS_PATHS",
    "AccuracyMatrix",
    "AugPolicy",
    "Augmenter",
    "ClassMeans",
    "ConfigError",
    "CurveSeries",
    "DEFAULTS",
    "DataError",
    "DimensionError",
    "EpochExhausted",
    "GENERATORS",
    "IntervalStats",
    "LogitBatch",
    "METHODS",
    "MODES",
    "MaskError",
    "MethodSpec",
    "MetricError",
    "Network",
    "OptimizerState",
    "PROTOCOLS",
    "PairingError",
    "ReplayBuffer",
    "RetentionTrace",
    "RngBundle",
    "RunRecord",
    "Sample",
    "Schedule",
    "SpacingParams",
    "StateError",
    "Task",
    "TaskStream",
    "TrainConfig",
    "VblabError",
    "ViewBatch",
    "ViewBatchEntry",
    "aggregate",
    "avg_accuracy",
    "buffer_insert_reservoir",
    "buffer_select_herding",
    "canonical_json",
    "class_means_from_buffer",
    "classify_nme",
    "config_hash",
    "cross_entropy",
    "decay_rate",
    "degree_of_forgetting",
    "drain_schedule",
    "evaluate",
    "evaluate_task",
    "execute_run",
    "forgetting",
    "generate_curves",
    "generate_dataset",
    "kl_divergence",
    "kl_divergence_rows",
    "last_accuracy",
    "load_config",
    "load_idx",
    "load_records",
    "loss_derpp",
    "loss_lwf",
    "loss_ssl",
    "loss_supervised",
    "mean_squared_error",
    "measure_recall_interval",
    "metrics_to_csv",
    "next_view_batch",
    "optimal_interval",
    "parse_config",
    "report",
    "retention",
    "retention_decay_summary",
    "run",
    "saturation_epoch",
    "sgd_step",
    "softmax",
    "substream",
    "sweep",
    "train_task",
    "validate_config",
    "write_idx",
    "write_records",
]
