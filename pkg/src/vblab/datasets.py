"""Dataset synthesis and loading.

Three synthetic generators cover the protocols at desk scale:

* ``split_gaussians`` — K Gaussian blobs in d dimensions, split by class
  into tasks.  ``separation`` scales the class means, so difficulty is
  dialled with one number.
* ``split_rings`` — concentric 2-D rings, one radius per class; a
  nonlinear problem a linear probe cannot solve.
* ``permuted_domains`` — one Gaussian base problem seen through a fixed
  random coordinate permutation per domain (the domain-incremental
  setting; every domain shares the class set).

``idx_images`` loads image/label pairs from IDX files (the MNIST binary
layout: big-endian, magic 0x00000803 for rank-3 image tensors and
0x00000801 for rank-1 label vectors) and splits classes into tasks.

All synthesis draws come from the dataset's own seed, not the run seed,
so different training seeds share identical data and comparisons across
configurations are paired.
"""

from __future__ import annotations

import struct

import numpy as np

from .augment import Sample
from .continual import Task, TaskStream
from .errors import ConfigError, DataError
from .seeding import substream

GENERATORS = ("split_gaussians", "split_rings", "permuted_domains", "idx_images")

_IDX_DTYPES = {
    0x08: ("u1", 1),
    0x09: ("i1", 1),
    0x0B: (">i2", 2),
    0x0C: (">i4", 4),
    0x0D: (">f4", 4),
    0x0E: (">f8", 8),
}


# ---------------------------------------------------------------------------
# IDX files
# ---------------------------------------------------------------------------


def load_idx(path: str) -> np.ndarray:
    """Parse one IDX file into an array, reporting byte offsets on failure."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise DataError(f"{path}: truncated IDX header at offset {len(raw)} (need 4 bytes)")
    if raw[0] != 0 or raw[1] != 0:
        off = 0 if raw[0] != 0 else 1
        raise DataError(
            f"{path}: bad IDX magic byte {raw[off]:#04x} at offset {off} (expected 0x00)"
        )
    dtype_code, ndim = raw[2], raw[3]
    if dtype_code not in _IDX_DTYPES:
        raise DataError(f"{path}: unknown IDX dtype code {dtype_code:#04x} at offset 2")
    header_len = 4 + 4 * ndim
    if len(raw) < header_len:
        raise DataError(f"{path}: truncated IDX dimensions at offset {len(raw)}")
    dims = struct.unpack(f">{ndim}I", raw[4:header_len])
    dtype, itemsize = _IDX_DTYPES[dtype_code]
    expected = int(np.prod(dims)) * itemsize if ndim else itemsize
    if len(raw) - header_len != expected:
        raise DataError(
            f"{path}: payload holds {len(raw) - header_len} bytes at offset {header_len}, "
            f"expected {expected} for shape {dims}"
        )
    arr = np.frombuffer(raw, dtype=dtype, offset=header_len)
    return arr.reshape(dims)


def write_idx(path: str, array: np.ndarray) -> None:
    """Write an array in IDX layout (inverse of :func:`load_idx`)."""
    kind_map = {"uint8": 0x08, "int8": 0x09, "int16": 0x0B, "int32": 0x0C,
                "float32": 0x0D, "float64": 0x0E}
    name = str(array.dtype)
    if name not in kind_map:
        raise DataError(f"dtype {name} has no IDX encoding")
    code = kind_map[name]
    dtype, _ = _IDX_DTYPES[code]
    with open(path, "wb") as fh:
        fh.write(bytes([0, 0, code, array.ndim]))
        fh.write(struct.pack(f">{array.ndim}I", *array.shape))
        fh.write(np.ascontiguousarray(array, dtype=dtype).tobytes())


# ---------------------------------------------------------------------------
# synthetic generators
# ---------------------------------------------------------------------------


def _class_means(rng: np.random.Generator, classes: int, dim: int, separation: float, placement: str) -> np.ndarray:
    if placement == "axes":
        if dim < classes:
            raise ConfigError(f"axes placement needs dim >= classes ({dim} < {classes})")
        means = np.zeros((classes, dim))
        means[np.arange(classes), np.arange(classes)] = separation
        return means
    if placement == "sphere":
        dirs = rng.normal(size=(classes, dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        return separation * dirs
    raise ConfigError(f"placement must be 'sphere' or 'axes', got {placement!r}")


def _gaussian_splits(params: dict, rng: np.random.Generator):
    classes = params["classes"]
    dim = params["dim"]
    sep = params.get("separation", 3.0)
    sigma = params.get("noise_sigma", 1.0)
    placement = params.get("placement", "sphere")
    means = _class_means(rng, classes, dim, sep, placement)
    train, test = [], []
    for cls in range(classes):
        train.append(means[cls] + sigma * rng.normal(size=(params["train_per_class"], dim)))
        test.append(means[cls] + sigma * rng.normal(size=(params["test_per_class"], dim)))
    return train, test


def _ring_splits(params: dict, rng: np.random.Generator):
    classes = params["classes"]
    gap = params.get("ring_gap", 1.0)
    sigma = params.get("ring_sigma", 0.1)

    def draw(count: int, cls: int) -> np.ndarray:
        angles = rng.uniform(0.0, 2.0 * np.pi, size=count)
        radii = (cls + 1) * gap + sigma * rng.normal(size=count)
        return np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)

    train = [draw(params["train_per_class"], cls) for cls in range(classes)]
    test = [draw(params["test_per_class"], cls) for cls in range(classes)]
    return train, test


def _class_tasks(
    train_by_class: list[np.ndarray],
    test_by_class: list[np.ndarray],
    n_tasks: int,
    image_shape: tuple[int, int] | None = None,
) -> list[Task]:
    n_classes = len(train_by_class)
    if not 1 <= n_tasks <= n_classes:
        raise ConfigError(f"tasks must lie in [1, {n_classes}], got {n_tasks}")
    groups = np.array_split(np.arange(n_classes), n_tasks)
    tasks = []
    next_id = 0
    for task_id, group in enumerate(groups):
        train: list[Sample] = []
        test: list[Sample] = []
        for cls in group:
            for row in train_by_class[cls]:
                train.append(Sample(np.asarray(row, dtype=np.float64).ravel(), int(cls), task_id, next_id, image_shape))
                next_id += 1
            for row in test_by_class[cls]:
                test.append(Sample(np.asarray(row, dtype=np.float64).ravel(), int(cls), task_id, next_id, image_shape))
                next_id += 1
        tasks.append(Task(train=train, test=test, classes=tuple(int(c) for c in group)))
    return tasks


def _domain_tasks(params: dict, n_tasks: int, rng: np.random.Generator) -> list[Task]:
    train_by_class, test_by_class = _gaussian_splits(params, rng)
    dim = train_by_class[0].shape[1]
    identity = params.get("identity_permutations", False)
    perms = []
    for d in range(n_tasks):
        if identity or d == 0:  # first domain is always the unpermuted base
            perms.append(np.arange(dim))
        else:
            perms.append(rng.permutation(dim))
    tasks = []
    next_id = 0
    n_classes = len(train_by_class)
    for domain, perm in enumerate(perms):
        train: list[Sample] = []
        test: list[Sample] = []
        for cls in range(n_classes):
            for row in train_by_class[cls]:
                train.append(Sample(np.asarray(row[perm], dtype=np.float64), cls, domain, next_id))
                next_id += 1
            for row in test_by_class[cls]:
                test.append(Sample(np.asarray(row[perm], dtype=np.float64), cls, domain, next_id))
                next_id += 1
        tasks.append(Task(train=train, test=test, classes=tuple(range(n_classes)), domain_id=domain))
    return tasks


def _idx_tasks(params: dict, n_tasks: int) -> list[Task]:
    images = load_idx(params["train_images"])
    labels = load_idx(params["train_labels"])
    test_images = load_idx(params["test_images"])
    test_labels = load_idx(params["test_labels"])
    for name, imgs, labs in (("train", images, labels), ("test", test_images, test_labels)):
        if imgs.ndim != 3:
            raise DataError(f"{name} images must be rank 3, got rank {imgs.ndim}")
        if labs.ndim != 1 or labs.shape[0] != imgs.shape[0]:
            raise DataError(
                f"{name} labels shape {labs.shape} does not match {imgs.shape[0]} images"
            )
    shape = (int(images.shape[1]), int(images.shape[2]))
    # raw label values are re-indexed positionally to 0..K-1
    classes = sorted(set(np.unique(labels).tolist()) | set(np.unique(test_labels).tolist()))
    scale = 255.0 if images.dtype == np.uint8 else 1.0
    train_by_class = [
        np.asarray(images[labels == c], dtype=np.float64).reshape(-1, shape[0] * shape[1]) / scale
        for c in classes
    ]
    test_by_class = [
        np.asarray(test_images[test_labels == c], dtype=np.float64).reshape(-1, shape[0] * shape[1]) / scale
        for c in classes
    ]
    return _class_tasks(train_by_class, test_by_class, n_tasks, image_shape=shape)


def generate_dataset(dataset_cfg: dict, stream_cfg: dict) -> TaskStream:
    """Build the task stream described by the dataset and stream sections."""
    generator = dataset_cfg.get("generator")
    if generator not in GENERATORS:
        raise ConfigError(f"generator must be one of {GENERATORS}, got {generator!r}")
    params = dataset_cfg.get("params", {})
    protocol = stream_cfg["protocol"]
    n_tasks = stream_cfg["tasks"]
    if generator == "permuted_domains":
        if protocol != "DIL":
            raise ConfigError("permuted_domains generates domain-incremental streams (protocol DIL)")
    elif protocol == "DIL":
        raise ConfigError(f"{generator} generates class splits; use protocol CIL or TIL")
    rng = substream(int(params.get("seed", 0)), "data")
    if generator == "split_gaussians":
        train, test = _gaussian_splits(params, rng)
        tasks = _class_tasks(train, test, n_tasks)
        n_classes = params["classes"]
    elif generator == "split_rings":
        train, test = _ring_splits(params, rng)
        tasks = _class_tasks(train, test, n_tasks)
        n_classes = params["classes"]
    elif generator == "permuted_domains":
        tasks = _domain_tasks(params, n_tasks, rng)
        n_classes = params["classes"]
    else:
        tasks = _idx_tasks(params, n_tasks)
        n_classes = len({c for t in tasks for c in t.classes})
    return TaskStream(tasks=tasks, protocol=protocol, n_classes=n_classes)
