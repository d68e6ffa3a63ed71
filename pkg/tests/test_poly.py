from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dwspectral.classifiers import (
    TrainConfig,
    poly_expand,
    poly_loss_and_grad,
    soft_targets,
    train_poly,
)
from dwspectral.classifiers._common import sigmoid
from dwspectral.errors import InvalidInputError
from dwspectral.features import TrainingSet

from gradcheck import max_relative_error, numeric_gradient, toy_sse


def test_expand_zero():
    assert poly_expand([0.0, 0.0, 0.0]).tolist() == [1, 0, 0, 0, 0, 0, 0, 0, 0, 0]


def test_expand_hand_enumeration():
    assert poly_expand([2.0, 3.0, 5.0]).tolist() == [1, 2, 3, 5, 4, 9, 25, 6, 10, 15]


def test_expand_ones():
    assert poly_expand([1.0, 1.0, 1.0]).tolist() == [1.0] * 10


def test_expand_wrong_length():
    with pytest.raises(InvalidInputError):
        poly_expand([1.0, 2.0])


@pytest.mark.parametrize("degree", [1, 2, 3, 4])
def test_term_count(degree):
    assert poly_expand(np.ones(3), degree).shape == (comb(3 + degree, degree),)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(20):
        w = rng.normal(0, 1.0, (3, 10))
        phi = poly_expand(rng.random((6, 3)))
        t = soft_targets(rng.integers(1, 4, 6), 3)
        _, g = poly_loss_and_grad(w, phi, t)
        num = numeric_gradient(lambda: toy_sse(sigmoid(phi @ w.T), t), {"w": w})
        worst = max(worst, max_relative_error({"w": g}, num))
    assert worst < 1e-4


def _circle(rng, n=400):
    p = rng.uniform(-1, 1, (n, 2))
    return p, np.where((p**2).sum(axis=1) < 0.5, 1, 2)


def test_circle_is_learnable():
    # the decision rule is a quadric, so the degree-2 hypothesis class contains it
    x, y = _circle(np.random.default_rng(0))
    ts = TrainingSet.from_arrays(x, y, n_classes=2)
    model = train_poly(ts, TrainConfig(5.0, 1000, None, seed=0))
    assert (model.predict(x) == y).mean() >= 0.99


def test_single_class_constant_argmax(rng):
    x = rng.random((40, 3))
    model = train_poly(TrainingSet.from_arrays(x, np.full(40, 3)))
    assert np.all(model.predict(rng.random((100, 3))) == 3)


@pytest.mark.parametrize("seed", range(5))
def test_quadratic_features_not_worse_than_linear(seed):
    rng = np.random.default_rng(100 + seed)
    x = rng.normal(0, 1, (300, 2))
    margin = x @ np.array([1.0, -0.7]) + 0.2
    x, margin = x[np.abs(margin) > 0.3], margin[np.abs(margin) > 0.3]
    y = np.where(margin > 0, 1, 2)
    ts = TrainingSet.from_arrays(x, y, n_classes=2)
    cfg = TrainConfig(0.5, 300, None, seed=seed)
    lin = (train_poly(ts, cfg, degree=1).predict(x) == y).mean()
    quad = (train_poly(ts, cfg, degree=2).predict(x) == y).mean()
    assert quad >= lin


@settings(max_examples=50, deadline=None)
@given(x=st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_expansion_matches_direct_products(x):
    phi = poly_expand(x)
    a, b, c = x
    expected = [1, a, b, c, a * a, b * b, c * c, a * b, a * c, b * c]
    np.testing.assert_allclose(phi, expected, rtol=1e-12, atol=1e-12)
