"""Named random substreams for reproducible runs.

Every run owns one root seed.  Each consumer of randomness (weight init,
epoch shuffling, augmentation draws, buffer sampling, data synthesis)
gets its own counter-based generator derived from (seed, label), so a
change in how one component consumes randomness never perturbs the
others.  Labels in use:

========  =====================================================
label     consumer
========  =====================================================
init      network weight initialisation
schedule  epoch permutations and batch composition
augment   augmentation draws (flips, shifts, erases, noise)
buffer    reservoir decisions and replay-batch sampling
data      synthetic dataset generation
========  =====================================================
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


def _label_key(label: str) -> int:
    # stable across processes and platforms, unlike hash()
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def substream(seed: int, label: str) -> np.random.Generator:
    """Return the named counter-based generator for ``(seed, label)``."""
    seq = np.random.SeedSequence([int(seed), _label_key(label)])
    return np.random.Generator(np.random.Philox(seq))


@dataclass
class RngBundle:
    """The full set of named substreams used by one run."""

    seed: int
    init: np.random.Generator
    schedule: np.random.Generator
    augment: np.random.Generator
    buffer: np.random.Generator
    data: np.random.Generator

    @classmethod
    def for_seed(cls, seed: int) -> "RngBundle":
        return cls(
            seed=seed,
            init=substream(seed, "init"),
            schedule=substream(seed, "schedule"),
            augment=substream(seed, "augment"),
            buffer=substream(seed, "buffer"),
            data=substream(seed, "data"),
        )
