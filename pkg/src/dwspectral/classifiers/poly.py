"""Polynomial network: monomial expansion feeding a single sigmoid layer.

With degree 2 the decision surfaces between classes are hyperquadrics.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from ..errors import InvalidInputError, InvalidParameterError
from ..features import Bounds, TrainingSet
from ._common import (
    SupervisedModel,
    TrainConfig,
    check_finite,
    epoch_error,
    sigmoid,
    soft_targets,
    uniform_init,
)

POLY_DEFAULTS = TrainConfig(eta0=0.1, eps=0.05, max_iters=200)


@lru_cache(maxsize=None)
def monomials(n_inputs: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """Index tuples of every monomial of total degree <= ``degree``.

    Ordered by degree; within a degree pure powers come first, then mixed
    terms lexicographically. For 3 inputs and degree 2 this is
    1, x1, x2, x3, x1^2, x2^2, x3^2, x1x2, x1x3, x2x3.
    """
    terms: list[tuple[int, ...]] = [()]
    for d in range(1, degree + 1):
        combos = list(combinations_with_replacement(range(n_inputs), d))
        pure = [c for c in combos if len(set(c)) == 1]
        terms += pure + [c for c in combos if len(set(c)) > 1]
    assert len(terms) == comb(n_inputs + degree, degree)
    return tuple(terms)


def poly_expand(x: np.ndarray, degree: int = 2, n_inputs: int | None = 3) -> np.ndarray:
    """Monomial features of ``x`` (last axis); pass ``n_inputs=None`` to accept any length."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0:
        raise InvalidInputError("poly_expand needs a vector")
    if n_inputs is not None and x.shape[-1] != n_inputs:
        raise InvalidInputError(f"expected {n_inputs} inputs, got {x.shape[-1]}")
    if degree < 1:
        raise InvalidParameterError("degree must be >= 1")
    cols = []
    for term in monomials(x.shape[-1], degree):
        col = np.ones(x.shape[:-1])
        for i in term:
            col = col * x[..., i]
        cols.append(col)
    return np.stack(cols, axis=-1)


@dataclass
class PolyModel(SupervisedModel):
    weights: np.ndarray  # (outputs, terms); the constant term acts as bias
    bounds: Bounds
    degree: int = 2
    config: TrainConfig | None = None
    final_error: float | None = None
    epochs: int = 0
    history: list[float] = field(default_factory=list)

    kind = "poly"

    def forward(self, z: np.ndarray) -> np.ndarray:
        return sigmoid(poly_expand(z, self.degree, None) @ self.weights.T)


def poly_loss_and_grad(weights, phi, targets):
    """Epoch error and gradient for expanded features ``phi``."""
    out = sigmoid(phi @ weights.T)
    delta = (out - targets) * out * (1.0 - out) / phi.shape[0]
    return epoch_error(out, targets), delta.T @ phi


def train_poly(training_set: TrainingSet, config: TrainConfig = POLY_DEFAULTS, degree: int = 2) -> PolyModel:
    """Delta-rule training of the output layer, sample by sample.

    Same stopping rule as the MLP. ``degree=1`` gives a plain single-layer
    perceptron with bias.
    """
    rng = np.random.default_rng(config.seed)
    phi = poly_expand(training_set.normalized(), degree, None)
    t = soft_targets(training_set.y, training_set.n_classes)
    w = uniform_init(rng, training_set.n_classes, phi.shape[1])

    history: list[float] = []
    for epoch in range(config.max_iters):
        eta = config.rate(epoch)
        for n in rng.permutation(phi.shape[0]):
            y = sigmoid(w @ phi[n])
            w -= eta * np.outer((y - t[n]) * y * (1.0 - y), phi[n])
        err = epoch_error(sigmoid(phi @ w.T), t)
        check_finite(err, epoch + 1)
        history.append(err)
        if config.eps is not None and err <= config.eps:
            break
    return PolyModel(w, training_set.bounds, degree, config, history[-1], len(history), history)
