from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import DivergenceError, InvalidInputError, InvalidParameterError
from ..features import Bounds, normalize

TARGET_LO, TARGET_HI = 0.1, 0.9
SCHEDULES = ("inverse", "constant")


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run.

    ``eps`` is the target epoch error; ``None`` trains for ``max_iters``
    epochs. With the ``inverse`` schedule the rate at epoch ``t`` is
    ``eta0 / (1 + t / tau)`` with ``tau = max_iters / 2``.
    """

    eta0: float
    max_iters: int
    eps: float | None = None
    seed: int = 0
    lr_schedule: str = "inverse"

    def __post_init__(self):
        if not (np.isfinite(self.eta0) and self.eta0 > 0):
            raise InvalidParameterError(f"eta0 must be > 0, got {self.eta0}")
        if self.eps is not None and not self.eps > 0:
            raise InvalidParameterError(f"eps must be > 0, got {self.eps}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidParameterError(f"max_iters must be a positive integer, got {self.max_iters}")
        if self.lr_schedule not in SCHEDULES:
            raise InvalidParameterError(f"unknown lr schedule {self.lr_schedule!r}")

    def rate(self, epoch: int) -> float:
        if self.lr_schedule == "constant":
            return self.eta0
        return self.eta0 / (1.0 + epoch / (self.max_iters / 2.0))

    def to_json(self) -> dict:
        return asdict(self)


def sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def soft_targets(y: np.ndarray, n_classes: int) -> np.ndarray:
    """One-hot rows with 0.1 / 0.9 levels; ``y`` holds labels 1..n_classes."""
    t = np.full((y.size, n_classes), TARGET_LO)
    t[np.arange(y.size), np.asarray(y) - 1] = TARGET_HI
    return t


def epoch_error(out: np.ndarray, targets: np.ndarray) -> float:
    """Mean over samples of half the summed squared output error."""
    return float(0.5 * np.sum((targets - out) ** 2) / out.shape[0])


def check_finite(value: float, epoch: int) -> None:
    if not np.isfinite(value):
        raise DivergenceError(epoch)


def uniform_init(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    lim = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-lim, lim, size=(fan_out, fan_in))


def decide(outputs: np.ndarray) -> np.ndarray:
    """Largest output wins; ties go to the lowest class. Returns labels 1..m."""
    return (np.argmax(outputs, axis=-1) + 1).astype(np.uint8)


class SupervisedModel:
    """Shared inference path: normalize raw features, forward, argmax."""

    bounds: Bounds

    @property
    def n_inputs(self) -> int:
        return self.bounds.lo.size

    def forward(self, z: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def outputs(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.n_inputs:
            raise InvalidInputError(f"model expects {self.n_inputs} bands, got {x.shape[1]}")
        return self.forward(normalize(x, self.bounds))

    def predict(self, x: np.ndarray) -> np.ndarray:
        return decide(self.outputs(x))
