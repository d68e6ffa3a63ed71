"""Two-layer sigmoid perceptron trained by sequential backpropagation."""
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

MLP_DEFAULTS = TrainConfig(eta0=0.2, eps=0.05, max_iters=1000)
HIDDEN_UNITS = 60


@dataclass
class MlpModel(SupervisedModel):
    w1: np.ndarray  # (hidden, inputs)
    b1: np.ndarray
    w2: np.ndarray  # (outputs, hidden)
    b2: np.ndarray
    bounds: Bounds
    config: TrainConfig | None = None
    final_error: float | None = None
    epochs: int = 0
    history: list[float] = field(default_factory=list)

    kind = "mlp"

    @property
    def params(self) -> dict[str, np.ndarray]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}

    def forward(self, z: np.ndarray) -> np.ndarray:
        return mlp_forward(self.params, z)[1]


def mlp_forward(params, z):
    hidden = sigmoid(z @ params["w1"].T + params["b1"])
    return hidden, sigmoid(hidden @ params["w2"].T + params["b2"])


def mlp_loss_and_grad(params, z, targets):
    """Epoch error and its gradient with respect to every parameter array."""
    hidden, out = mlp_forward(params, z)
    n = z.shape[0]
    delta2 = (out - targets) * out * (1.0 - out) / n
    delta1 = (delta2 @ params["w2"]) * hidden * (1.0 - hidden)
    grads = {
        "w2": delta2.T @ hidden,
        "b2": delta2.sum(axis=0),
        "w1": delta1.T @ z,
        "b1": delta1.sum(axis=0),
    }
    return epoch_error(out, targets), grads


def init_mlp_params(rng: np.random.Generator, n_in: int, n_hidden: int, n_out: int) -> dict[str, np.ndarray]:
    w1 = uniform_init(rng, n_hidden, n_in + 1)
    w2 = uniform_init(rng, n_out, n_hidden + 1)
    return {"w1": w1[:, :-1].copy(), "b1": w1[:, -1].copy(), "w2": w2[:, :-1].copy(), "b2": w2[:, -1].copy()}


def train_mlp(
    training_set: TrainingSet, config: TrainConfig = MLP_DEFAULTS, hidden: int = HIDDEN_UNITS
) -> MlpModel:
    """Sequential-mode backpropagation on the half squared error.

    Samples are visited in a fresh seeded permutation each epoch. Training
    stops once the epoch error (evaluated over the whole set after the epoch)
    reaches ``config.eps`` or after ``config.max_iters`` epochs.
    """
    rng = np.random.default_rng(config.seed)
    z = training_set.normalized()
    t = soft_targets(training_set.y, training_set.n_classes)
    p = init_mlp_params(rng, z.shape[1], hidden, training_set.n_classes)
    w1, b1, w2, b2 = p["w1"], p["b1"], p["w2"], p["b2"]

    history: list[float] = []
    for epoch in range(config.max_iters):
        eta = config.rate(epoch)
        for n in rng.permutation(z.shape[0]):
            x = z[n]
            h = sigmoid(w1 @ x + b1)
            y = sigmoid(w2 @ h + b2)
            d2 = (y - t[n]) * y * (1.0 - y)
            d1 = (d2 @ w2) * h * (1.0 - h)
            w2 -= eta * np.outer(d2, h)
            b2 -= eta * d2
            w1 -= eta * np.outer(d1, x)
            b1 -= eta * d1
        err = epoch_error(mlp_forward(p, z)[1], t)
        check_finite(err, epoch + 1)
        history.append(err)
        if config.eps is not None and err <= config.eps:
            break
    return MlpModel(w1, b1, w2, b2, training_set.bounds, config, history[-1], len(history), history)
