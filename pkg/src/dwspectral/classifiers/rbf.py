"""Radial basis function network: k-means prototypes + trained sigmoid output layer."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

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
from .kmeans import KMEANS_DEFAULTS, train_kmeans

RBF_OUTPUT_DEFAULTS = TrainConfig(eta0=0.1, max_iters=200)
RBF_CENTERS = 18
MIN_WIDTH = 1e-6


@dataclass
class RbfModel(SupervisedModel):
    centers: np.ndarray  # (k, inputs) in normalized feature space
    widths: np.ndarray  # (k,)
    weights: np.ndarray  # (outputs, k)
    bias: np.ndarray  # (outputs,)
    bounds: Bounds
    hidden_config: TrainConfig | None = None
    output_config: TrainConfig | None = None
    quantization_error: float | None = None
    final_error: float | None = None
    epochs: int = 0
    history: list[float] = field(default_factory=list)

    kind = "rbf"

    def activations(self, z: np.ndarray) -> np.ndarray:
        return gaussian_activations(z, self.centers, self.widths)

    def forward(self, z: np.ndarray) -> np.ndarray:
        return sigmoid(self.activations(z) @ self.weights.T + self.bias)


def gaussian_activations(z, centers, widths):
    """``exp(-|z - c_j|^2 / (2 sigma_j^2))``; equals 1 exactly at a center."""
    z = np.atleast_2d(z)
    d2 = ((z[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
    return np.exp(-d2 / (2.0 * widths**2))


def nearest_center_widths(centers: np.ndarray, floor: float = MIN_WIDTH) -> np.ndarray:
    """Width of each unit = distance to the closest other center (at least ``floor``)."""
    if centers.shape[0] == 1:
        return np.ones(1)
    d = np.sqrt(((centers[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1))
    np.fill_diagonal(d, np.inf)
    return np.maximum(d.min(axis=1), floor)


def train_rbf(
    training_set: TrainingSet,
    k: int = RBF_CENTERS,
    hidden_config: TrainConfig = KMEANS_DEFAULTS,
    output_config: TrainConfig = RBF_OUTPUT_DEFAULTS,
) -> RbfModel:
    """Two-stage training: prototypes by online k-means, then the delta rule
    on the sigmoid output layer with the prototypes frozen."""
    z = training_set.normalized()
    km = train_kmeans(z, k, hidden_config)
    widths = nearest_center_widths(km.centers)
    act = gaussian_activations(z, km.centers, widths)
    t = soft_targets(training_set.y, training_set.n_classes)

    rng = np.random.default_rng(output_config.seed)
    w = uniform_init(rng, training_set.n_classes, k + 1)
    weights, bias = w[:, :-1].copy(), w[:, -1].copy()
    history: list[float] = []
    for epoch in range(output_config.max_iters):
        eta = output_config.rate(epoch)
        for n in rng.permutation(act.shape[0]):
            y = sigmoid(weights @ act[n] + bias)
            delta = (y - t[n]) * y * (1.0 - y)
            weights -= eta * np.outer(delta, act[n])
            bias -= eta * delta
        err = epoch_error(sigmoid(act @ weights.T + bias), t)
        check_finite(err, epoch + 1)
        history.append(err)
        if output_config.eps is not None and err <= output_config.eps:
            break
    return RbfModel(
        km.centers, widths, weights, bias, training_set.bounds, hidden_config, output_config,
        km.quantization_error, history[-1], len(history), history,
    )
