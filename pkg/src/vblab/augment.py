"""Weak and strong augmentation with deterministic seeded draws.

Two severities are supported.  *Weak* is a horizontal flip for image
samples and a small Gaussian jitter for plain vectors.  *Strong* is the
fixed composition shift -> erase -> noise for images; for vectors the
shift stage is inert and the erase stage becomes coordinate dropout
(``erase_size`` coordinates zeroed), so the weak-before-strong severity
ordering is preserved on both kinds of data.

All randomness comes from the generator handed in by the caller, and
the draw order per stage is fixed, so the same (sample, policy, seed)
always yields bitwise-identical output.  A stage whose magnitude is
zero draws nothing and changes nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError

POLICY_KINDS = ("weak", "strong")


@dataclass(frozen=True, eq=False)
class Sample:
    """One labelled sample; ``features`` is a flat float64 vector.

    ``image_shape`` (height, width), when present, lets spatial
    augmentations reshape the vector.  ``sample_id`` is unique across the
    dataset and survives augmentation, which is what lets the scheduler
    measure recall intervals.
    """

    features: np.ndarray
    label: int
    task_id: int
    sample_id: int
    image_shape: tuple[int, int] | None = None

    def as_image(self) -> np.ndarray:
        if self.image_shape is None:
            raise ConfigError(f"sample {self.sample_id} carries no image shape")
        h, w = self.image_shape
        return self.features.reshape(h, w)


@dataclass(frozen=True)
class AugPolicy:
    """Parameters for one augmentation severity."""

    kind: str  # 'weak' or 'strong'
    flip_prob: float = 0.0
    shift_max: int = 0
    erase_size: int = 0
    noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"policy kind must be one of {POLICY_KINDS}, got {self.kind!r}")
        if not 0.0 <= self.flip_prob <= 1.0:
            raise ConfigError(f"flip_prob must lie in [0, 1], got {self.flip_prob}")
        if self.shift_max < 0 or self.erase_size < 0:
            raise ConfigError("shift_max and erase_size must be non-negative")
        if self.noise_sigma < 0.0:
            raise ConfigError(f"noise_sigma must be non-negative, got {self.noise_sigma}")


class Augmenter:
    """Applies one weak and one strong policy to samples of a known shape.

    ``image_shape`` is the (height, width) of image datasets, or None for
    vector data.  Policy/shape incompatibilities (a flip or shift on
    shapeless vectors, an erase square larger than the image) are
    rejected here, at construction.
    """

    def __init__(
        self,
        weak: AugPolicy,
        strong: AugPolicy,
        image_shape: tuple[int, int] | None = None,
    ):
        if weak.kind != "weak" or strong.kind != "strong":
            raise ConfigError("Augmenter needs one 'weak' and one 'strong' policy, in that order")
        if image_shape is not None:
            h, w = int(image_shape[0]), int(image_shape[1])
            if h <= 0 or w <= 0:
                raise ConfigError(f"image_shape must be positive, got {image_shape}")
            if strong.erase_size > min(h, w):
                raise ConfigError(
                    f"erase_size {strong.erase_size} exceeds image sides {image_shape}"
                )
            self.image_shape: tuple[int, int] | None = (h, w)
        else:
            for pol in (weak, strong):
                if pol.flip_prob > 0.0 or pol.shift_max > 0:
                    raise ConfigError("flip and shift require image-shaped samples")
            self.image_shape = None
        self.weak = weak
        self.strong = strong

    # -- stages --------------------------------------------------------

    def _flip(self, img: np.ndarray, prob: float, rng: np.random.Generator) -> np.ndarray:
        if prob > 0.0 and rng.uniform() < prob:
            return img[:, ::-1]
        return img

    def _shift(self, img: np.ndarray, max_px: int, rng: np.random.Generator) -> np.ndarray:
        if max_px == 0:
            return img
        dr, dc = rng.integers(-max_px, max_px + 1, size=2)
        out = np.zeros_like(img)
        h, w = img.shape
        src_r = slice(max(0, -dr), min(h, h - dr))
        dst_r = slice(max(0, dr), min(h, h + dr))
        src_c = slice(max(0, -dc), min(w, w - dc))
        dst_c = slice(max(0, dc), min(w, w + dc))
        out[dst_r, dst_c] = img[src_r, src_c]
        return out

    def _erase_image(self, img: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
        if k == 0:
            return img
        h, w = img.shape
        r0 = int(rng.integers(0, h - k + 1))
        c0 = int(rng.integers(0, w - k + 1))
        out = img.copy()
        out[r0 : r0 + k, c0 : c0 + k] = 0.0
        return out

    def _drop_coords(self, vec: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
        if k == 0:
            return vec
        if k > vec.size:
            raise ConfigError(f"erase_size {k} exceeds feature dimension {vec.size}")
        idx = rng.choice(vec.size, size=k, replace=False)
        out = vec.copy()
        out[idx] = 0.0
        return out

    def _noise(self, arr: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
        if sigma == 0.0:
            return arr
        return arr + rng.normal(0.0, sigma, size=arr.shape)

    # -- public API ----------------------------------------------------

    def augment_weak(self, sample: Sample, rng: np.random.Generator) -> Sample:
        """Weak view: flip (images) or identity, plus optional small jitter."""
        pol = self.weak
        if self.image_shape is not None:
            img = self._flip(sample.as_image(), pol.flip_prob, rng)
            img = self._noise(img, pol.noise_sigma, rng)
            feats = img.reshape(-1)
        else:
            feats = self._noise(sample.features, pol.noise_sigma, rng)
        return replace(sample, features=np.array(feats, dtype=np.float64))

    def augment_strong(self, sample: Sample, rng: np.random.Generator) -> Sample:
        """Strong view: shift -> erase -> noise (dropout replaces erase on vectors)."""
        pol = self.strong
        if self.image_shape is not None:
            img = self._shift(sample.as_image(), pol.shift_max, rng)
            img = self._erase_image(img, pol.erase_size, rng)
            img = self._noise(img, pol.noise_sigma, rng)
            feats = img.reshape(-1)
        else:
            feats = self._drop_coords(sample.features, pol.erase_size, rng)
            feats = self._noise(feats, pol.noise_sigma, rng)
        return replace(sample, features=np.array(feats, dtype=np.float64))

    def make_views(
        self,
        sample: Sample,
        views: int,
        rng: np.random.Generator,
        strong_enabled: bool = True,
    ) -> list[Sample]:
        """One weak view followed by ``views - 1`` strong views of one sample.

        With ``strong_enabled`` False the extra views fall back to the
        weak policy.  Every view keeps the source's sample_id and label.
        """
        if views < 1:
            raise ValueError(f"views must be >= 1, got {views}")
        out = [self.augment_weak(sample, rng)]
        for _ in range(views - 1):
            if strong_enabled:
                out.append(self.augment_strong(sample, rng))
            else:
                out.append(self.augment_weak(sample, rng))
        return out
