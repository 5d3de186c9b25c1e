"""Per-image targeted attack: iterated sign-gradient steps inside an l-inf ball.

Each step moves ``I <- I - alpha * sign(grad (f(I) - target)^2)`` (descent on
the squared error) and then clamps to ``[I0 - eps, I0 + eps]`` intersected with
[0, 1]. ``sign(0)`` is 0, so a pixel with no gradient stays put. There is no
early stopping.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DimensionError, NumericError
from .metrics import MetricsReport, RBounds, evaluate
from .scorer import ScorerSpec, score, score_grad, validate_image


@dataclass(frozen=True)
class AttackConfig:
    epsilon: float = 0.005
    iterations: int = 10
    step_size: float = 0.005

    def __post_init__(self):
        if not self.epsilon > 0 or not self.step_size > 0:
            raise ArgumentError("epsilon and step_size must be > 0")
        if self.iterations < 1:
            raise ArgumentError("iterations must be >= 1")


@dataclass
class AttackResult:
    adversarial: np.ndarray
    original_score: float
    achieved_score: float
    target_score: float
    linf_distance: float
    # squared error before each step, then after the last one (iterations + 1 values)
    loss_trace: list[float] = field(default_factory=list)


def attack_image(spec: ScorerSpec, img, target: float, cfg: AttackConfig = AttackConfig()) -> AttackResult:
    original = validate_image(img)
    if not math.isfinite(target):
        raise ArgumentError(f"target score must be finite, got {target}")
    lo = np.maximum(original - cfg.epsilon, 0.0)
    hi = np.minimum(original + cfg.epsilon, 1.0)

    x = original.copy()
    first = current = score(spec, x)
    trace = []
    for k in range(cfg.iterations):
        residual = current - target
        trace.append(residual * residual)
        grad = 2.0 * residual * score_grad(spec, x)
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"non-finite attack gradient at iteration {k}")
        x = np.clip(x - cfg.step_size * np.sign(grad), lo, hi)
        current = score(spec, x)
    trace.append((current - target) ** 2)
    return AttackResult(
        adversarial=x,
        original_score=first,
        achieved_score=current,
        target_score=float(target),
        linf_distance=float(np.max(np.abs(x - original))),
        loss_trace=trace,
    )


def attack_set(
    spec: ScorerSpec,
    images,
    targets,
    cfg: AttackConfig = AttackConfig(),
    bounds: RBounds = RBounds(),
    jobs: int = 1,
) -> tuple[list[AttackResult], MetricsReport]:
    """Attack every image toward its target; results keep input order."""
    images = list(images)
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim != 1 or len(images) != targets.size:
        raise DimensionError(f"{len(images)} images but {targets.size} targets")
    if len(images) < 2:
        raise ArgumentError(f"need N >= 2 images for correlation metrics, got N={len(images)}")
    if jobs < 1:
        raise ArgumentError("jobs must be >= 1")

    def one(i: int) -> AttackResult:
        return attack_image(spec, images[i], float(targets[i]), cfg)

    if jobs == 1:
        results = [one(i) for i in range(len(images))]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, range(len(images))))
    before = np.array([r.original_score for r in results])
    after = np.array([r.achieved_score for r in results])
    return results, evaluate(before, after, bounds)
