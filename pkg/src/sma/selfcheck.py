"""Oracle and gradient checks runnable from the command line.

Each ``check_*`` returns a :class:`Check`. The acceptance tests call the same
functions with their full sample counts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from . import oracles
from .metrics import krocc, srocc
from .numerics import finite_diff_grad
from .ranking import hard_rank, permutahedron_project, soft_rank, soft_rank_vjp
from .scorer import ScorerSpec, score, score_grad
from .stage_one import StageOneConfig, stage_one_grad, stage_one_objective


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    worst: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: worst={self.worst:.3e} {self.detail}".rstrip()


def tie_free_vector(gen: np.random.Generator, n: int) -> np.ndarray:
    while True:
        s = gen.uniform(-50.0, 50.0, n)
        if np.unique(s).size == n:
            return s


def check_small_beta_exact(count: int = 1000, seed: int = 11) -> Check:
    """Soft ranks equal hard ranks once beta is below the smallest sorted gap."""
    gen = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        s = tie_free_vector(gen, int(gen.integers(2, 51)))
        beta = 0.9 * float(np.min(-np.diff(np.sort(s)[::-1])))
        worst = max(worst, float(np.max(np.abs(soft_rank(s, beta).values - hard_rank(s)))))
    return Check("small-beta exactness", worst < 1e-9, worst, f"({count} vectors, N in 2..50)")


def check_projection_oracle(count: int = 200, seed: int = 12) -> Check:
    gen = np.random.default_rng(seed)
    vertices = {n: oracles.permutation_vertices(n) for n in (1, 2, 3, 4)}
    worst = 0.0
    for _ in range(count):
        n = int(gen.integers(1, 5))
        z = gen.normal(0.0, float(gen.choice([0.3, 1.0, 3.0, 10.0])), n) + float(gen.normal(0, 2))
        want = oracles.project_onto_hull(z, vertices[n])
        worst = max(worst, float(np.max(np.abs(permutahedron_project(z).values - want))))
    return Check("projection vs brute-force hull QP", worst <= 1e-8, worst, f"({count} inputs, N <= 4)")


def _blocks_stable(s: np.ndarray, beta: float, h: float) -> bool:
    """True if no coordinate nudge of 10*h changes the sort order or pooled blocks."""
    ref = soft_rank(s, beta)
    key = (tuple(ref.order), tuple(ref.block_starts))
    for i, sign in itertools.product(range(s.size), (-1.0, 1.0)):
        moved = s.copy()
        moved[i] += sign * 10.0 * h
        r = soft_rank(moved, beta)
        if (tuple(r.order), tuple(r.block_starts)) != key:
            return False
    return True


def generic_point(gen: np.random.Generator, n: int, beta: float, h: float, spread: float = 3.0) -> np.ndarray:
    while True:
        s = gen.normal(0.0, spread, n)
        if _blocks_stable(s, beta, h):
            return s


def check_soft_rank_vjp(count: int = 100, seed: int = 13, h: float = 1e-5, tol: float = 1e-4) -> Check:
    gen = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        beta = 1.0
        s = generic_point(gen, 10, beta, h, spread=float(gen.choice([0.5, 2.0, 5.0])))
        u = gen.normal(size=10)
        got = soft_rank_vjp(soft_rank(s, beta), u)
        want = finite_diff_grad(lambda x: float(u @ soft_rank(x, beta).values), s, h)
        worst = max(worst, oracles.relative_error(got, want))
    return Check("soft_rank_vjp vs finite differences", worst <= tol, worst, f"({count} points)")


def check_stage_one_grad(count: int = 100, seed: int = 14, h: float = 1e-5, tol: float = 1e-4) -> Check:
    gen = np.random.default_rng(seed)
    worst = 0.0
    for k in range(count):
        cfg = StageOneConfig(beta=1.0, lambda_var=[0.0, 1e-4, 1e-2][k % 3], lambda_mse=[0.0, 1e-2, 1e-4][k % 3])
        s = gen.normal(0.0, 3.0, 10)
        s_tilde = generic_point(gen, 10, cfg.beta, h, spread=float(gen.choice([0.5, 2.0, 5.0])))
        got = stage_one_grad(s_tilde, s, cfg)
        want = finite_diff_grad(lambda x: stage_one_objective(x, s, cfg), s_tilde, h)
        worst = max(worst, oracles.relative_error(got, want))
    return Check("stage_one_grad vs finite differences", worst <= tol, worst, f"({count} points)")


def interior_image(gen: np.random.Generator, shape=(6, 5, 2), h: float = 1e-5) -> np.ndarray:
    """Random image with no adjacent pixel pair within 10*h (|.| stays differentiable)."""
    while True:
        img = gen.uniform(0.2, 0.8, shape)
        if min(np.abs(np.diff(img, axis=0)).min(), np.abs(np.diff(img, axis=1)).min()) > 10 * h:
            return img


def check_score_grad(count: int = 100, seed: int = 15, h: float = 1e-5, tol: float = 1e-4) -> Check:
    gen = np.random.default_rng(seed)
    worst = 0.0
    spec = ScorerSpec.feature_affine(bias=0.0)
    for k in range(count):
        img = interior_image(gen)
        use = spec if k % 4 else ScorerSpec.linear_mean(100.0)
        got = score_grad(use, img)
        want = finite_diff_grad(lambda x: score(use, x), img, h)
        worst = max(worst, oracles.relative_error(got, want))
    return Check("score_grad vs finite differences", worst <= tol, worst, f"({count} images)")


def check_metric_oracles(random_count: int = 500, seed: int = 16, max_exhaustive: int = 6) -> Check:
    """SROCC/KROCC against pair counting, then random tie-free vectors.

    Both metrics only see the relative order of the two vectors, so fixing
    ``a`` and enumerating every permutation ``b`` covers all tie-free inputs
    of that length. Up to N=5 every ``(a, b)`` permutation pair is run anyway;
    for larger N a few ``a`` orders are used.
    """
    worst = 0.0
    cases = 0
    gen = np.random.default_rng(seed)
    for n in range(2, max_exhaustive + 1):
        base = np.arange(n, dtype=np.float64)
        perms = list(itertools.permutations(range(n)))
        a_orders = perms if n <= 5 else [perms[0], perms[-1]] + [tuple(gen.permutation(n)) for _ in range(3)]
        for p in a_orders:
            a = base[list(p)]
            for q in perms:
                b = base[list(q)] * 1.5 + 0.25
                worst = max(
                    worst,
                    abs(srocc(a, b) - oracles.pair_count_srocc(a, b)),
                    abs(krocc(a, b) - oracles.pair_count_krocc(a, b)),
                )
                cases += 1
    for _ in range(random_count):
        n = int(gen.integers(2, 11))
        a, b = tie_free_vector(gen, n), tie_free_vector(gen, n)
        worst = max(
            worst,
            abs(srocc(a, b) - oracles.pair_count_srocc(a, b)),
            abs(krocc(a, b) - oracles.pair_count_krocc(a, b)),
        )
        cases += 1
    return Check("srocc/krocc vs pair counting", worst <= 1e-12, worst, f"({cases} vector pairs)")


def run_all(scale: float = 0.2) -> list[Check]:
    """All checks at ``scale`` times the acceptance sample counts."""
    k = lambda n: max(1, int(n * scale))  # noqa: E731
    return [
        check_small_beta_exact(k(1000)),
        check_projection_oracle(k(200)),
        check_soft_rank_vjp(k(100)),
        check_stage_one_grad(k(100)),
        check_score_grad(k(100)),
        check_metric_oracles(k(500), max_exhaustive=5 if scale < 1 else 6),
    ]
