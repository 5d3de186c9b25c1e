"""Hard ranks and their differentiable surrogate.

Ranks are descending: rank 1 goes to the largest score. The soft rank of ``s``
at temperature ``beta`` is the Euclidean projection of ``-s / beta`` onto the
permutahedron (the convex hull of all permutations of ``1..N``). The
projection is solved exactly with one sort and one pool-adjacent-violators
pass, and the pooled blocks are kept so the vector-Jacobian product costs O(N).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DimensionError, NumericError


def _finite_vector(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise ArgumentError(f"{name} must be a non-empty 1-D vector")
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise NumericError(f"{name} has a non-finite entry at index {bad}")
    return x


def descending_order(s: np.ndarray) -> np.ndarray:
    """Indices sorting ``s`` largest first; ties keep ascending index order."""
    return np.argsort(-s, kind="stable")


def hard_rank(s) -> np.ndarray:
    s = _finite_vector(s, "scores")
    ranks = np.empty(s.size, dtype=np.int64)
    ranks[descending_order(s)] = np.arange(1, s.size + 1)
    return ranks


def pav_decreasing(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares fit of a non-increasing sequence to ``y``.

    Returns the fitted values and the start offset of each pooled block.
    Blocks are merged only on strict violations.
    """
    sums: list[float] = []
    counts: list[int] = []
    for value in y.tolist():
        total, count = value, 1
        # previous block mean < current block mean violates the ordering
        while sums and sums[-1] * count < total * counts[-1]:
            total += sums.pop()
            count += counts.pop()
        sums.append(total)
        counts.append(count)
    counts_arr = np.asarray(counts)
    means = np.asarray(sums) / counts_arr
    starts = np.concatenate(([0], np.cumsum(counts_arr)[:-1]))
    return np.repeat(means, counts_arr), starts


@dataclass(frozen=True)
class Projection:
    values: np.ndarray
    order: np.ndarray
    block_starts: np.ndarray

    @property
    def blocks(self) -> list[np.ndarray]:
        """Original indices in each pooled block, in descending-sort order."""
        return np.split(self.order, self.block_starts[1:])


@dataclass(frozen=True)
class SoftRankResult(Projection):
    beta: float = 1.0


def permutahedron_project(z) -> Projection:
    z = _finite_vector(z, "z")
    n = z.size
    order = descending_order(z)
    z_sorted = z[order]
    fit, starts = pav_decreasing(z_sorted - np.arange(n, 0, -1, dtype=np.float64))
    values = np.empty(n)
    values[order] = z_sorted - fit
    return Projection(values, order, starts)


def soft_rank(s, beta: float) -> SoftRankResult:
    if not beta > 0:
        raise ArgumentError(f"beta must be > 0, got {beta}")
    s = _finite_vector(s, "scores")
    p = permutahedron_project(-s / beta)
    return SoftRankResult(p.values, p.order, p.block_starts, float(beta))


def soft_rank_vjp(result: SoftRankResult, upstream) -> np.ndarray:
    """Gradient of ``upstream . soft_rank(s).values`` with respect to ``s``.

    In sorted coordinates the projection Jacobian is identity minus block
    averaging, so singleton blocks pass no gradient. The chain through
    ``-s / beta`` contributes the ``-1 / beta`` factor. At block boundaries this
    is the one-sided derivative for the computed blocks.
    """
    u = np.asarray(upstream, dtype=np.float64)
    if u.shape != result.values.shape:
        raise DimensionError(f"upstream has shape {u.shape}, expected {result.values.shape}")
    u_sorted = u[result.order]
    counts = np.diff(np.append(result.block_starts, u.size))
    block_means = np.add.reduceat(u_sorted, result.block_starts) / counts
    g_sorted = (u_sorted - np.repeat(block_means, counts)) * (-1.0 / result.beta)
    grad = np.empty_like(u)
    grad[result.order] = g_sorted
    return grad
