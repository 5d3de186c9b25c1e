"""Slow, independent reference computations used by ``selfcheck`` and the tests.

None of these share code paths with the fast implementations they check.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import nnls

from .errors import NumericError


def pair_count_ranks(s) -> list[int]:
    """Descending ranks by counting, with the ascending-index tie-break."""
    s = [float(x) for x in s]
    return [
        1 + sum(1 for k, v in enumerate(s) if v > s[j] or (v == s[j] and k < j))
        for j in range(len(s))
    ]


def pair_count_srocc(a, b) -> float:
    ra, rb = pair_count_ranks(a), pair_count_ranks(b)
    n = len(ra)
    return 1.0 - 6.0 * sum((x - y) ** 2 for x, y in zip(ra, rb)) / (n * (n * n - 1))


def pair_count_krocc(a, b) -> float:
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    n = len(a)
    net = 0
    for i in range(n):
        for j in range(i + 1, n):
            # compare signs, not the product, which can underflow to zero
            net += ((a[i] > a[j]) - (a[i] < a[j])) * ((b[i] > b[j]) - (b[i] < b[j]))
    return net / (n * (n - 1) / 2)


def permutation_vertices(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.float64)


def project_onto_hull(z, vertices: np.ndarray | None = None) -> np.ndarray:
    """Euclidean projection of ``z`` onto the convex hull of ``vertices``.

    A simplex-constrained least-squares fit over all vertices (NNLS with a
    heavily weighted sum-to-one row) locates the optimal face; the point is
    then re-solved exactly on that face's affine hull and checked against the
    variational inequality over every vertex.
    """
    z = np.asarray(z, dtype=np.float64)
    V = permutation_vertices(z.size) if vertices is None else vertices
    scale = max(1.0, float(np.abs(z).max()), float(np.abs(V).max()))
    weight = 1e4 * scale
    A = np.vstack([V.T, np.full(len(V), weight)])
    lam, _ = nnls(A, np.append(z, weight), maxiter=50 * A.shape[1])
    support = V[lam > 1e-10 * lam.max()]
    base = support[0]
    D = (support[1:] - base).T
    if D.size:
        coef, *_ = np.linalg.lstsq(D, z - base, rcond=None)
        x = base + D @ coef
    else:
        x = base.copy()
    if not is_hull_projection(z, x, V):
        raise NumericError("brute-force projection failed its optimality certificate")
    return x


def is_hull_projection(z, x, vertices: np.ndarray, tol: float = 1e-9) -> bool:
    """Optimality of ``x``: (z - x) . (v - x) <= 0 for every vertex, and ``x`` in the hull."""
    z = np.asarray(z, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    scale = max(1.0, float(np.abs(z).max()), float(np.abs(vertices).max())) ** 2
    if np.max((vertices - x) @ (z - x)) > tol * scale:
        return False
    return in_permutahedron(x, tol=1e-9 * math.sqrt(scale))


def in_permutahedron(x, tol: float = 1e-9) -> bool:
    """Majorization test: partial sums of the sorted coordinates."""
    x = np.sort(np.asarray(x, dtype=np.float64))[::-1]
    n = x.size
    w = np.arange(n, 0, -1, dtype=np.float64)
    head_x, head_w = np.cumsum(x), np.cumsum(w)
    return bool(np.all(head_x <= head_w + tol) and abs(head_x[-1] - head_w[-1]) <= tol * n)


def relative_error(got, want, floor: float = 1e-8) -> float:
    got = np.ravel(got)
    want = np.ravel(want)
    denom = max(float(np.linalg.norm(got)), float(np.linalg.norm(want)), floor)
    return float(np.linalg.norm(got - want)) / denom
