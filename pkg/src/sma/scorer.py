"""Differentiable score-regression models over images.

An image is a float64 array of shape ``(height, width, channels)`` with
pixels in [0, 1]. A scorer exposes :func:`score` and :func:`score_grad`; any
real model adapter has to provide the same pair. Both toy scorers clip their
raw output to ``[clip_lo, clip_hi]`` like a final clipping layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .numerics import Rng

LINEAR_MEAN = "linear_mean"
FEATURE_AFFINE = "feature_affine"
FEATURE_NAMES = ("mean", "std", "mean_abs_dx", "mean_abs_dy")

# Weights for (mean, std, mean|dx|, mean|dy|). Random-noise images from
# ``random_images`` score roughly 35..65 under these.
DEFAULT_FEATURE_COEFFICIENTS = (20.0, 1000.0, 500.0, 500.0)
DEFAULT_FEATURE_BIAS = -85.0


@dataclass(frozen=True)
class ScorerSpec:
    kind: str
    coefficients: tuple[float, ...]
    bias: float = 0.0
    clip_lo: float = 0.0
    clip_hi: float = 100.0

    def __post_init__(self):
        expected = {LINEAR_MEAN: 1, FEATURE_AFFINE: len(FEATURE_NAMES)}
        if self.kind not in expected:
            raise ArgumentError(f"unknown scorer kind {self.kind!r}")
        if len(self.coefficients) != expected[self.kind]:
            raise ArgumentError(
                f"{self.kind} takes {expected[self.kind]} coefficients, got {len(self.coefficients)}"
            )
        if not self.clip_lo < self.clip_hi:
            raise ArgumentError("need clip_lo < clip_hi")

    @classmethod
    def linear_mean(cls, scale: float = 100.0, bias: float = 0.0, **clip) -> "ScorerSpec":
        return cls(LINEAR_MEAN, (float(scale),), float(bias), **clip)

    @classmethod
    def feature_affine(
        cls, coefficients=DEFAULT_FEATURE_COEFFICIENTS, bias: float = DEFAULT_FEATURE_BIAS, **clip
    ) -> "ScorerSpec":
        return cls(FEATURE_AFFINE, tuple(float(c) for c in coefficients), float(bias), **clip)

    @classmethod
    def named(cls, name: str) -> "ScorerSpec":
        if name == LINEAR_MEAN:
            return cls.linear_mean()
        if name == FEATURE_AFFINE:
            return cls.feature_affine()
        raise ArgumentError(f"unknown scorer {name!r}; choose {LINEAR_MEAN} or {FEATURE_AFFINE}")


def validate_image(img) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or min(img.shape) < 1:
        raise ArgumentError(f"image must be a non-empty H x W x C array, got shape {img.shape}")
    if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 1.0:
        raise ArgumentError("image pixels must be finite and lie in [0, 1]")
    return img


def features(img: np.ndarray) -> np.ndarray:
    dx = np.diff(img, axis=1)
    dy = np.diff(img, axis=0)
    return np.array([
        img.mean(),
        img.std(),
        np.abs(dx).mean() if dx.size else 0.0,
        np.abs(dy).mean() if dy.size else 0.0,
    ])


def _feature_grads(img: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted sum of the per-pixel feature gradients."""
    n = img.size
    grad = np.full(img.shape, weights[0] / n)
    std = img.std()
    if std > 0.0:
        grad += weights[1] * (img - img.mean()) / (n * std)
    if img.shape[1] > 1:
        g = weights[2] * np.sign(np.diff(img, axis=1)) / (img.size - img.shape[0] * img.shape[2])
        grad[:, 1:] += g
        grad[:, :-1] -= g
    if img.shape[0] > 1:
        g = weights[3] * np.sign(np.diff(img, axis=0)) / (img.size - img.shape[1] * img.shape[2])
        grad[1:] += g
        grad[:-1] -= g
    return grad


def raw_score(spec: ScorerSpec, img: np.ndarray) -> float:
    if spec.kind == LINEAR_MEAN:
        return spec.coefficients[0] * float(img.mean()) + spec.bias
    return float(np.dot(spec.coefficients, features(img))) + spec.bias


def score(spec: ScorerSpec, img) -> float:
    img = validate_image(img)
    return float(np.clip(raw_score(spec, img), spec.clip_lo, spec.clip_hi))


def score_grad(spec: ScorerSpec, img) -> np.ndarray:
    """Pixel gradient of :func:`score`.

    Zero where the clip saturates (raw strictly outside the clip range); the
    raw gradient otherwise, including exactly on a bound.
    """
    img = validate_image(img)
    raw = raw_score(spec, img)
    if raw < spec.clip_lo or raw > spec.clip_hi:
        return np.zeros_like(img)
    if spec.kind == LINEAR_MEAN:
        return np.full(img.shape, spec.coefficients[0] / img.size)
    return _feature_grads(img, np.asarray(spec.coefficients))


def score_set(spec: ScorerSpec, images) -> np.ndarray:
    images = list(images)
    if not images:
        raise ArgumentError("need at least one image to score")
    return np.array([score(spec, img) for img in images])


def random_images(rng: Rng, n: int, height: int = 32, width: int = 32, channels: int = 3) -> list[np.ndarray]:
    """Seeded noise images: a per-image base level plus uniform noise of a per-image amplitude."""
    if n < 1:
        raise ArgumentError("need n >= 1 images")
    images = []
    for _ in range(n):
        base = rng.uniform(0.4, 0.6, 1)[0]
        amplitude = rng.uniform(0.095, 0.105, 1)[0]
        noise = rng.uniform(-1.0, 1.0, (height, width, channels))
        images.append(np.clip(base + amplitude * noise, 0.0, 1.0))
    return images
