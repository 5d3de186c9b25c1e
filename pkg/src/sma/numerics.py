"""Adam, a central-difference gradient oracle and a seeded random stream."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import ArgumentError, DimensionError, NumericError


@dataclass(frozen=True)
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    learning_rate: float = 0.05
    decay1: float = 0.9
    decay2: float = 0.999
    stabilizer: float = 1e-8

    def __post_init__(self):
        if self.first_moment.shape != self.second_moment.shape:
            raise DimensionError("Adam moment vectors differ in shape")
        if not self.learning_rate > 0:
            raise ArgumentError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not (0.0 <= self.decay1 < 1.0 and 0.0 <= self.decay2 < 1.0):
            raise ArgumentError("decay rates must lie in [0, 1)")
        if not self.stabilizer > 0:
            raise ArgumentError("stabilizer must be > 0")
        if self.step_count < 0:
            raise ArgumentError("step_count must be non-negative")

    @classmethod
    def fresh(cls, size: int, learning_rate: float = 0.05, **hyper) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size), 0, learning_rate, **hyper)


def adam_step(params, grads, state: AdamState) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update (descent). Inputs are not modified."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state.first_moment.shape:
        raise DimensionError(
            f"params {params.shape}, grads {grads.shape} and moments "
            f"{state.first_moment.shape} must match"
        )
    t = state.step_count + 1
    m = state.decay1 * state.first_moment + (1.0 - state.decay1) * grads
    v = state.decay2 * state.second_moment + (1.0 - state.decay2) * (grads * grads)
    m_hat = m / (1.0 - state.decay1**t)
    v_hat = v / (1.0 - state.decay2**t)
    new_params = params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.stabilizer)
    return new_params, replace(state, first_moment=m, second_moment=v, step_count=t)


def finite_diff_grad(f: Callable[[np.ndarray], float], x, h: float = 1e-5) -> np.ndarray:
    """Central differences, one coordinate at a time. ``x`` keeps its shape."""
    if not h > 0:
        raise ArgumentError(f"step h must be > 0, got {h}")
    x = np.array(x, dtype=np.float64)
    grad = np.empty_like(x)
    flat_x = x.reshape(-1)
    flat_g = grad.reshape(-1)
    for i in range(flat_x.size):
        orig = flat_x[i]
        flat_x[i] = orig + h
        f_plus = float(f(x))
        flat_x[i] = orig - h
        f_minus = float(f(x))
        flat_x[i] = orig
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NumericError(f"non-finite function value around coordinate {i}")
        flat_g[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


@dataclass
class Rng:
    """Seeded stream backed by PCG64. Not safe to share between threads."""

    seed: int
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ArgumentError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        self._gen = np.random.Generator(np.random.PCG64(int(self.seed)))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def uniform(self, lo: float, hi: float, n) -> np.ndarray:
        return rng_uniform(self, lo, hi, n)

    def normal(self, n) -> np.ndarray:
        return self._gen.standard_normal(n)


def rng_uniform(rng: Rng, lo: float, hi: float, n) -> np.ndarray:
    if not lo < hi:
        raise ArgumentError(f"need lo < hi, got lo={lo}, hi={hi}")
    if np.prod(n) < 1:
        raise ArgumentError("need at least one draw")
    out = rng.generator.uniform(lo, hi, n)
    # uniform() can round up to hi for some (lo, hi); keep the half-open range
    return np.where(out >= hi, np.nextafter(hi, lo), out)
