import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sma.errors import ArgumentError
from sma.numerics import Rng, finite_diff_grad
from sma.selfcheck import interior_image
from sma.scorer import ScorerSpec, features, random_images, score, score_grad, score_set


def test_linear_mean_examples():
    spec = ScorerSpec.linear_mean()
    assert score(spec, np.zeros((4, 4, 1))) == 0.0
    assert score(spec, np.ones((4, 4, 3))) == 100.0
    assert score(ScorerSpec.linear_mean(scale=200.0), np.ones((4, 4, 3))) == 100.0


def test_linear_mean_gradient():
    g = score_grad(ScorerSpec.linear_mean(), np.full((2, 3, 3), 0.5))
    np.testing.assert_allclose(g, np.full((2, 3, 3), 100.0 / 18))


def test_saturated_clip_has_zero_gradient():
    g = score_grad(ScorerSpec.linear_mean(scale=400.0), np.full((2, 2, 1), 0.5))
    np.testing.assert_array_equal(g, 0.0)


def test_features_of_flat_image():
    np.testing.assert_allclose(features(np.full((3, 3, 1), 0.25)), [0.25, 0.0, 0.0, 0.0])


def test_score_set():
    spec = ScorerSpec.feature_affine()
    img = random_images(Rng(1), 1)[0]
    np.testing.assert_array_equal(score_set(spec, [img]), [score(spec, img)])
    with pytest.raises(ArgumentError):
        score_set(spec, [])


def test_synthetic_scores_reproducible_and_spread():
    spec = ScorerSpec.feature_affine()
    a = score_set(spec, random_images(Rng(3), 64))
    b = score_set(spec, random_images(Rng(3), 64))
    np.testing.assert_array_equal(a, b)
    assert np.unique(a).size == 64
    assert 0.0 < a.min() and a.max() < 100.0


def test_named_and_invalid_images():
    assert ScorerSpec.named("linear_mean").kind == "linear_mean"
    with pytest.raises(ArgumentError):
        ScorerSpec.named("vgg")
    with pytest.raises(ArgumentError):
        score(ScorerSpec.linear_mean(), np.zeros((4, 4)))
    with pytest.raises(ArgumentError):
        score(ScorerSpec.linear_mean(), np.full((2, 2, 1), 1.5))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_feature_gradient_matches_finite_differences(seed):
    img = interior_image(np.random.default_rng(seed), (4, 5, 2))
    spec = ScorerSpec.feature_affine()
    fd = finite_diff_grad(lambda x: score(spec, x.reshape(img.shape)), img.ravel()).reshape(img.shape)
    g = score_grad(spec, img)
    assert np.max(np.abs(g - fd)) <= 1e-4 * max(1.0, np.max(np.abs(fd)))
