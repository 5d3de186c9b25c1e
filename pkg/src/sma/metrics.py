"""Correlation and error metrics between two score vectors.

Rank-based metrics use :func:`hard_rank` (integer ranks, index tie-break), so
the Spearman formula below is exact only for permutation ranks, which is
always what it receives.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .errors import ArgumentError, DegenerateInputError, DimensionError, NumericError
from .ranking import _finite_vector, hard_rank, soft_rank, soft_rank_vjp

# Default R-metric anchors: highest and lowest mean opinion score of the reference set.
R_HI = 90.55
R_LO = 3.50


@dataclass(frozen=True)
class RBounds:
    hi: float = R_HI
    lo: float = R_LO

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ArgumentError(f"R bounds need hi > lo, got hi={self.hi}, lo={self.lo}")


def _pair(a, b, min_len: int = 1) -> tuple[np.ndarray, np.ndarray]:
    a = _finite_vector(a, "a")
    b = _finite_vector(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < min_len:
        raise ArgumentError(f"need N >= {min_len} scores, got N={a.size}")
    return a, b


def _spearman_from_ranks(ra: np.ndarray, rb: np.ndarray) -> float:
    n = ra.size
    d = ra - rb
    return 1.0 - 6.0 * float(np.dot(d, d)) / (n * (n * n - 1.0))


def srocc(a, b) -> float:
    a, b = _pair(a, b, 2)
    return _spearman_from_ranks(hard_rank(a).astype(np.float64), hard_rank(b).astype(np.float64))


def soft_srocc(a, b, beta: float, soft_reference: bool = True) -> float:
    """Spearman correlation with ``a`` soft-ranked at ``beta``.

    ``soft_reference=True`` soft-ranks ``b`` too, as in the Stage-One
    objective. ``False`` keeps hard ranks for ``b``, the ablation-table
    definition.
    """
    return soft_srocc_and_grad(a, b, beta, soft_reference)[0]


def soft_srocc_and_grad(a, b, beta: float, soft_reference: bool = True) -> tuple[float, np.ndarray]:
    """Soft SROCC and its gradient with respect to ``a``."""
    a, b = _pair(a, b, 2)
    ra = soft_rank(a, beta)
    rb = soft_rank(b, beta).values if soft_reference else hard_rank(b).astype(np.float64)
    return soft_srocc_from_ranks(ra, rb)


def soft_srocc_from_ranks(ra, rb: np.ndarray) -> tuple[float, np.ndarray]:
    n = rb.size
    scale = 6.0 / (n * (n * n - 1.0))
    d = ra.values - rb
    value = 1.0 - scale * float(np.dot(d, d))
    return value, soft_rank_vjp(ra, -2.0 * scale * d)


def krocc(a, b) -> float:
    """Kendall tau-a; tied pairs count as neither concordant nor discordant."""
    a, b = _pair(a, b, 2)
    n = a.size
    sa = np.sign(a[:, None] - a[None, :])
    sb = np.sign(b[:, None] - b[None, :])
    # each unordered pair appears twice in the full matrix
    return float(np.sum(sa * sb)) / (n * (n - 1.0))


def plcc(a, b) -> float:
    a, b = _pair(a, b, 2)
    da = a - a.mean()
    db = b - b.mean()
    na = math.sqrt(float(np.dot(da, da)))
    nb = math.sqrt(float(np.dot(db, db)))
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("PLCC undefined: an input has zero variance")
    return float(np.clip(np.dot(da, db) / (na * nb), -1.0, 1.0))


def mse(a, b) -> float:
    a, b = _pair(a, b)
    d = a - b
    return float(np.dot(d, d)) / a.size


def rmse(a, b) -> float:
    return math.sqrt(mse(a, b))


def variance(s) -> float:
    s = _finite_vector(s, "scores")
    if s.size < 2:
        raise ArgumentError(f"variance needs N >= 2, got N={s.size}")
    d = s - s.mean()
    return float(np.dot(d, d)) / (s.size - 1)


def abs_gain(before, after) -> float:
    before, after = _pair(before, after)
    return float(np.mean(np.abs(after - before)))


def r_metric(before, after, bounds: RBounds = RBounds(), log: Callable[[float], float] = math.log) -> float:
    """Mean log ratio of the largest feasible score change to the achieved one.

    ``log`` defaults to the natural logarithm; pass ``math.log10`` etc. to
    change the base.
    """
    before, after = _pair(before, after)
    change = np.abs(before - after)
    zero = np.flatnonzero(change == 0.0)
    if zero.size:
        raise NumericError(f"R metric divides by zero: score unchanged at index {int(zero[0])}")
    room = np.maximum(bounds.hi - before, before - bounds.lo)
    return float(np.mean([log(r / c) for r, c in zip(room.tolist(), change.tolist())]))


def delta_rank(before, after) -> float:
    before, after = _pair(before, after)
    return float(np.mean(np.abs(hard_rank(after) - hard_rank(before))))


@dataclass(frozen=True)
class MetricsReport:
    srocc: float
    krocc: float
    plcc: float
    rmse: float
    mse: float
    abs_gain: float
    r_metric: float
    delta_rank: float

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate(before, after, bounds: RBounds = RBounds()) -> MetricsReport:
    """All metrics between scores before and after an attack.

    R is reported as ``inf`` when some score did not move; PLCC is ``nan``
    when either vector is constant.
    """
    try:
        r = r_metric(before, after, bounds)
    except NumericError:
        r = math.inf
    try:
        p = plcc(before, after)
    except DegenerateInputError:
        p = math.nan
    m = mse(before, after)
    return MetricsReport(
        srocc=srocc(before, after),
        krocc=krocc(before, after),
        plcc=p,
        rmse=math.sqrt(m),
        mse=m,
        abs_gain=abs_gain(before, after),
        r_metric=r,
        delta_rank=delta_rank(before, after),
    )
