"""Target-score optimization.

Finds target scores that minimize

    soft_srocc(t, s) - lambda_var * variance(t) - lambda_mse * mse(t, s)

with Adam. The start is rank-neutral: every target begins at the mean of
``s`` plus a little seeded noise. Starting at ``s`` itself would sit on a
maximum of the correlation term, where its gradient vanishes.

The first ``warmup_fraction`` of the epochs optimize the correlation term
alone. Under Adam's per-coordinate normalization the variance and MSE terms
otherwise take over as soon as the scores spread, and the order freezes
half-reversed (SROCC near -0.5). Targets are not boxed to the scorer's output
range.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ArgumentError, DimensionError, NumericError
from .metrics import soft_srocc_from_ranks
from .numerics import AdamState, Rng, adam_step
from .ranking import _finite_vector, soft_rank

logger = logging.getLogger(__name__)

FULL_EPOCHS = 100_000
DESK_EPOCHS = 50_000


@dataclass(frozen=True)
class StageOneConfig:
    beta: float = 1.0
    lambda_var: float = 1e-4
    lambda_mse: float = 1e-4
    epochs: int = FULL_EPOCHS
    learning_rate: float = 0.01
    init_noise: float = 1e-3
    warmup_fraction: float = 0.3
    seed: int = 0
    trace_every: int = 0  # 0 picks roughly 1000 trace points

    def __post_init__(self):
        if not self.beta > 0:
            raise ArgumentError(f"beta must be > 0, got {self.beta}")
        if self.lambda_var < 0 or self.lambda_mse < 0:
            raise ArgumentError("lambda_var and lambda_mse must be >= 0")
        if self.epochs < 0:
            raise ArgumentError(f"epochs must be >= 0, got {self.epochs}")
        if not self.learning_rate > 0:
            raise ArgumentError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.init_noise < 0:
            raise ArgumentError("init_noise must be >= 0")
        if not 0.0 <= self.warmup_fraction <= 1.0:
            raise ArgumentError("warmup_fraction must lie in [0, 1]")
        if self.trace_every < 0:
            raise ArgumentError("trace_every must be >= 0")


# Multiplier settings used for the attacked models: one shared setting, and a
# separate one for the most robust model.
PRESETS = {
    "full": StageOneConfig(),
    "desk": StageOneConfig(epochs=DESK_EPOCHS),
    "maniqa": StageOneConfig(lambda_var=2e-4, lambda_mse=1e-5),
}


@dataclass
class StageOneTrace:
    epoch: list[int] = field(default_factory=list)
    objective: list[float] = field(default_factory=list)
    srocc_term: list[float] = field(default_factory=list)
    var_term: list[float] = field(default_factory=list)
    mse_term: list[float] = field(default_factory=list)

    def record(self, epoch: int, parts: tuple[float, float, float, float]) -> None:
        self.epoch.append(epoch)
        for column, value in zip((self.objective, self.srocc_term, self.var_term, self.mse_term), parts):
            column.append(value)

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(np.asarray(self.objective))


def _check_inputs(s_tilde, s) -> tuple[np.ndarray, np.ndarray]:
    s_tilde = _finite_vector(s_tilde, "s_tilde")
    s = _finite_vector(s, "s")
    if s_tilde.shape != s.shape:
        raise DimensionError(f"length mismatch: {s_tilde.size} vs {s.size}")
    if s.size < 2:
        raise ArgumentError(f"Stage One needs N >= 2 scores, got N={s.size}")
    return s_tilde, s


def _evaluate(s_tilde: np.ndarray, s: np.ndarray, ref_ranks: np.ndarray, cfg: StageOneConfig):
    """Objective parts (total, srocc, var, mse) and the gradient in one pass."""
    n = s.size
    corr, grad = soft_srocc_from_ranks(soft_rank(s_tilde, cfg.beta), ref_ranks)
    centered = s_tilde - s_tilde.mean()
    var = float(np.dot(centered, centered)) / (n - 1)
    diff = s_tilde - s
    err = float(np.dot(diff, diff)) / n
    total = corr - cfg.lambda_var * var - cfg.lambda_mse * err
    grad = grad - cfg.lambda_var * (2.0 / (n - 1)) * centered - cfg.lambda_mse * (2.0 / n) * diff
    return (total, corr, var, err), grad


def stage_one_objective(s_tilde, s, cfg: StageOneConfig) -> float:
    s_tilde, s = _check_inputs(s_tilde, s)
    return _evaluate(s_tilde, s, soft_rank(s, cfg.beta).values, cfg)[0][0]


def stage_one_grad(s_tilde, s, cfg: StageOneConfig) -> np.ndarray:
    s_tilde, s = _check_inputs(s_tilde, s)
    return _evaluate(s_tilde, s, soft_rank(s, cfg.beta).values, cfg)[1]


def initial_targets(s: np.ndarray, cfg: StageOneConfig) -> np.ndarray:
    return s.mean() + cfg.init_noise * Rng(cfg.seed).normal(s.size)


def optimize_targets(s, cfg: StageOneConfig) -> tuple[np.ndarray, StageOneTrace]:
    s = _finite_vector(s, "s")
    if s.size < 2:
        raise ArgumentError(f"Stage One needs N >= 2 scores, got N={s.size}")
    ref_ranks = soft_rank(s, cfg.beta).values
    every = cfg.trace_every or max(1, cfg.epochs // 1000)

    warmup_epochs = int(cfg.warmup_fraction * cfg.epochs)
    warmup_cfg = replace(cfg, lambda_var=0.0, lambda_mse=0.0)

    x = initial_targets(s, cfg)
    state = AdamState.fresh(s.size, cfg.learning_rate)
    trace = StageOneTrace()
    for epoch in range(cfg.epochs):
        parts, grad = _evaluate(x, s, ref_ranks, warmup_cfg if epoch < warmup_epochs else cfg)
        if not math.isfinite(parts[0]) or not np.all(np.isfinite(grad)):
            raise NumericError(f"non-finite Stage One objective at epoch {epoch}")
        if epoch % every == 0:
            trace.record(epoch, parts)
        x, state = adam_step(x, grad, state)
        if not np.all(np.isfinite(x)):
            raise NumericError(f"non-finite target scores after epoch {epoch}")
    parts, _ = _evaluate(x, s, ref_ranks, cfg)
    trace.record(cfg.epochs, parts)
    logger.debug("stage one done: objective %.6f after %d epochs", parts[0], cfg.epochs)
    return x, trace


def with_overrides(cfg: StageOneConfig, **changes) -> StageOneConfig:
    return replace(cfg, **{k: v for k, v in changes.items() if v is not None})
