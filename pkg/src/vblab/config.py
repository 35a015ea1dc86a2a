"""Experiment configuration: schema validation, defaults, canonical form.

A run is described by one JSON object.  Validation happens before any
computation: the top-level schema fixes the section layout (unknown keys
are rejected everywhere), then the generator-specific parameter schema
is applied to ``dataset.params``.  After validation the user's values
are merged over the defaults, and the merged dict — in canonical
key-sorted JSON — is what gets hashed and stored in run records.
"""

from __future__ import annotations

import copy
import hashlib
import json

import jsonschema

from .errors import ConfigError

_POLICY_PROPS = {
    "flip_prob": {"type": "number", "minimum": 0, "maximum": 1},
    "shift_max": {"type": "integer", "minimum": 0},
    "erase_size": {"type": "integer", "minimum": 0},
    "noise_sigma": {"type": "number", "minimum": 0},
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["dataset", "stream", "method", "train", "seeds"],
    "properties": {
        "dataset": {
            "type": "object",
            "additionalProperties": False,
            "required": ["generator"],
            "properties": {
                "generator": {
                    "enum": ["split_gaussians", "split_rings", "permuted_domains", "idx_images"]
                },
                "params": {"type": "object"},
            },
        },
        "stream": {
            "type": "object",
            "additionalProperties": False,
            "required": ["protocol", "tasks"],
            "properties": {
                "protocol": {"enum": ["CIL", "TIL", "DIL"]},
                "tasks": {"type": "integer", "minimum": 1},
            },
        },
        "network": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "hidden": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 1},
                },
                "activation": {"enum": ["relu", "tanh"]},
            },
        },
        "method": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": ["finetune", "joint", "er", "derpp", "lwf", "icarl"]},
                "alpha": {"type": "number", "minimum": 0},
                "beta": {"type": "number", "minimum": 0},
                "kd_temperature": {"type": "number", "minimum": 1},
            },
        },
        "train": {
            "type": "object",
            "additionalProperties": False,
            "required": ["base_epochs", "batch_size"],
            "properties": {
                "base_epochs": {"type": "integer", "minimum": 1},
                "batch_size": {"type": "integer", "minimum": 1},
                "views": {"type": "integer", "minimum": 1},
                "learning_rate": {"type": "number", "exclusiveMinimum": 0},
                "momentum": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "weight_decay": {"type": "number", "minimum": 0},
                "mode": {"enum": ["conventional", "view_batch_sample", "view_batch_class"]},
                "ssl_enabled": {"type": "boolean"},
                "strong_aug_enabled": {"type": "boolean"},
                "ssl_grad_through_target": {"type": "boolean"},
                "class_groups": {"type": "integer", "minimum": 1},
                "buffer_entries": {"type": ["integer", "null"], "minimum": 0},
            },
        },
        "augment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "weak": {"type": "object", "additionalProperties": False, "properties": _POLICY_PROPS},
                "strong": {"type": "object", "additionalProperties": False, "properties": _POLICY_PROPS},
            },
        },
        "buffer": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "capacity": {"type": "integer", "minimum": 0},
                "policy": {"enum": ["reservoir", "herding"]},
            },
        },
        "seeds": {
            "type": "array",
            "items": {"type": "integer", "minimum": 0},
            "minItems": 1,
        },
        "output_dir": {"type": "string"},
        "diagnostics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "log_presentations": {"type": "boolean"},
                "record_steps": {"type": "boolean"},
                "track_decay": {"type": "boolean"},
            },
        },
    },
}

_COMMON_SYNTH = {
    "classes": {"type": "integer", "minimum": 2},
    "train_per_class": {"type": "integer", "minimum": 1},
    "test_per_class": {"type": "integer", "minimum": 1},
    "seed": {"type": "integer", "minimum": 0},
}

GENERATOR_PARAM_SCHEMAS = {
    "split_gaussians": {
        "type": "object",
        "additionalProperties": False,
        "required": ["classes", "dim", "train_per_class", "test_per_class"],
        "properties": {
            **_COMMON_SYNTH,
            "dim": {"type": "integer", "minimum": 1},
            "separation": {"type": "number", "exclusiveMinimum": 0},
            "noise_sigma": {"type": "number", "exclusiveMinimum": 0},
            "placement": {"enum": ["sphere", "axes"]},
        },
    },
    "split_rings": {
        "type": "object",
        "additionalProperties": False,
        "required": ["classes", "train_per_class", "test_per_class"],
        "properties": {
            **_COMMON_SYNTH,
            "ring_gap": {"type": "number", "exclusiveMinimum": 0},
            "ring_sigma": {"type": "number", "exclusiveMinimum": 0},
        },
    },
    "permuted_domains": {
        "type": "object",
        "additionalProperties": False,
        "required": ["classes", "dim", "train_per_class", "test_per_class"],
        "properties": {
            **_COMMON_SYNTH,
            "dim": {"type": "integer", "minimum": 1},
            "separation": {"type": "number", "exclusiveMinimum": 0},
            "noise_sigma": {"type": "number", "exclusiveMinimum": 0},
            "placement": {"enum": ["sphere", "axes"]},
            "identity_permutations": {"type": "boolean"},
        },
    },
    "idx_images": {
        "type": "object",
        "additionalProperties": False,
        "required": ["train_images", "train_labels", "test_images", "test_labels"],
        "properties": {
            "train_images": {"type": "string"},
            "train_labels": {"type": "string"},
            "test_images": {"type": "string"},
            "test_labels": {"type": "string"},
        },
    },
}

DEFAULTS = {
    "network": {"hidden": [64], "activation": "relu"},
    "method": {"alpha": 0.5, "beta": 0.5, "kd_temperature": 2.0},
    "train": {
        "views": 1,
        "learning_rate": 0.05,
        "momentum": 0.0,
        "weight_decay": 0.0,
        "mode": "conventional",
        "ssl_enabled": False,
        "strong_aug_enabled": True,
        "ssl_grad_through_target": False,
        "class_groups": 1,
        "buffer_entries": None,
    },
    "buffer": {"capacity": 0, "policy": "reservoir"},
    "output_dir": "runs",
    "diagnostics": {"log_presentations": False, "record_steps": False, "track_decay": False},
}


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def validate_config(raw: dict) -> dict:
    """Validate a raw config dict and return it merged over the defaults."""
    if not isinstance(raw, dict):
        raise ConfigError(f"config must be a JSON object, got {type(raw).__name__}")
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        path = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {err.message}") from err
    generator = raw["dataset"]["generator"]
    params = raw["dataset"].get("params", {})
    try:
        jsonschema.validate(params, GENERATOR_PARAM_SCHEMAS[generator])
    except jsonschema.ValidationError as err:
        path = ".".join(str(p) for p in err.absolute_path) or "<params>"
        raise ConfigError(f"dataset.params invalid at {path}: {err.message}") from err
    merged = _deep_merge(DEFAULTS, raw)
    merged["dataset"].setdefault("params", {})
    if merged["dataset"]["generator"] != "idx_images":
        merged["dataset"]["params"].setdefault("seed", 0)
    return merged


def parse_config(text: str) -> dict:
    """Parse and validate a JSON config document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    return validate_config(raw)


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    return parse_config(text)


def canonical_json(config: dict) -> str:
    """Key-sorted, whitespace-free JSON; the hashing and storage form."""
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()[:16]
