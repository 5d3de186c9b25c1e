import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sma import oracles
from sma.errors import ArgumentError, NumericError
from sma.numerics import finite_diff_grad
from sma.ranking import hard_rank, pav_decreasing, permutahedron_project, soft_rank, soft_rank_vjp

finite = st.floats(-1e3, 1e3, allow_nan=False)
vectors = arrays(np.float64, st.integers(1, 12), elements=finite)


def test_hard_rank_examples():
    np.testing.assert_array_equal(hard_rank([3.0, 1.0, 2.0]), [1, 3, 2])
    np.testing.assert_array_equal(hard_rank([2.0, 2.0, 1.0]), [1, 2, 3])


def test_soft_rank_small_beta_is_hard():
    np.testing.assert_allclose(soft_rank([3.0, 1.0, 2.0], 0.1).values, [1, 3, 2])


def test_soft_rank_large_beta_pools_to_mean_rank():
    np.testing.assert_allclose(soft_rank([3.0, 1.0, 2.0], 1e6).values, [2, 2, 2], atol=1e-5)


def test_soft_rank_rejects_bad_input():
    with pytest.raises(ArgumentError):
        soft_rank([1.0, 2.0], 0.0)
    with pytest.raises(ArgumentError):
        soft_rank([], 1.0)
    with pytest.raises((ArgumentError, NumericError)):
        soft_rank([1.0, float("nan")], 1.0)


def test_pav_examples():
    fit, starts = pav_decreasing(np.array([1.0, 3.0, 2.0]))
    np.testing.assert_allclose(fit, [2.0, 2.0, 2.0])
    assert list(starts) == [0, 2]
    fit, starts = pav_decreasing(np.array([3.0, 2.0, 1.0]))
    np.testing.assert_allclose(fit, [3.0, 2.0, 1.0])
    assert list(starts) == [0, 1, 2]


@settings(max_examples=200, deadline=None)
@given(vectors)
def test_projection_lies_in_permutahedron(z):
    values = permutahedron_project(z).values
    n = z.size
    assert values.sum() == pytest.approx(n * (n + 1) / 2, rel=1e-12, abs=1e-9)
    assert oracles.in_permutahedron(values)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(1, 5), elements=finite))
def test_projection_satisfies_optimality(z):
    vertices = oracles.permutation_vertices(z.size)
    assert oracles.is_hull_projection(z, permutahedron_project(z).values, vertices)


@settings(max_examples=100, deadline=None)
@given(vectors, st.floats(0.01, 100.0))
def test_soft_rank_order_preserving(s, beta):
    values = soft_rank(s, beta).values
    order = np.argsort(-s, kind="stable")
    assert np.all(np.diff(values[order]) >= -1e-9)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=12), st.integers(-100, 100))
def test_hard_rank_shift_invariant(values, c):
    s = np.array(values, dtype=float)
    np.testing.assert_array_equal(hard_rank(s), hard_rank(s + c))


@settings(max_examples=100, deadline=None)
@given(vectors)
def test_hard_rank_is_permutation(s):
    assert sorted(hard_rank(s).tolist()) == list(range(1, s.size + 1))


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(2, 30), elements=finite, unique=True))
def test_small_beta_gives_hard_ranks(s):
    gap = float(np.min(-np.diff(np.sort(s)[::-1])))
    assume(gap > 1e-6)
    np.testing.assert_allclose(soft_rank(s, 0.9 * gap).values, hard_rank(s), atol=1e-9)


def test_vjp_singletons_give_zero():
    res = soft_rank([3.0, 1.0, 2.0], 0.1)
    np.testing.assert_array_equal(soft_rank_vjp(res, np.array([1.0, 2.0, 3.0])), np.zeros(3))


def test_vjp_single_block():
    beta = 1e6
    res = soft_rank([3.0, 1.0, 2.0], beta)
    u = np.array([1.0, 2.0, 6.0])
    np.testing.assert_allclose(soft_rank_vjp(res, u), -(u - u.mean()) / beta)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 10), st.sampled_from([0.3, 1.0, 3.0]))
def test_vjp_matches_finite_differences(seed, n, beta):
    gen = np.random.default_rng(seed)
    s = gen.normal(0, 2.0, n)
    u = gen.normal(size=n)
    res = soft_rank(s, beta)
    # only test away from block boundaries, where the map is smooth
    assume(all(np.array_equal(soft_rank(s + d, beta).block_starts, res.block_starts)
               for d in (1e-4 * np.eye(n))))
    fd = finite_diff_grad(lambda x: float(u @ soft_rank(x, beta).values), s)
    np.testing.assert_allclose(soft_rank_vjp(res, u), fd, atol=1e-6)
