"""Online (sequential) k-means with a decaying learning rate."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidParameterError
from ._common import TrainConfig

KMEANS_DEFAULTS = TrainConfig(eta0=0.1, max_iters=200)


@dataclass
class KMeansResult:
    centers: np.ndarray
    quantization_error: float
    history: list[float] = field(default_factory=list)
    repairs: int = 0


def _sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)


def quantization_error(x: np.ndarray, centers: np.ndarray) -> float:
    """Mean squared distance from each sample to its nearest center."""
    return float(_sq_dists(x, centers).min(axis=1).mean())


def _repair(x: np.ndarray, centers: np.ndarray, empty: np.ndarray) -> int:
    """Move centers that won no sample onto the sample farthest from any center."""
    for j in np.flatnonzero(empty):
        far = int(np.argmax(_sq_dists(x, centers).min(axis=1)))
        centers[j] = x[far]
    return int(empty.sum())


def kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: each new center drawn with probability ~ squared
    distance to the centers chosen so far."""
    centers = [x[rng.integers(x.shape[0])]]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(x.shape[0])
        else:
            idx = rng.choice(x.shape[0], p=d2 / total)
        centers.append(x[idx])
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(axis=1))
    return np.array(centers, dtype=np.float64)


def train_kmeans(x: np.ndarray, k: int = 18, config: TrainConfig = KMEANS_DEFAULTS) -> KMeansResult:
    """Winner-take-all prototype learning.

    Centers start from seeded k-means++ seeding (distinct samples whenever
    the data has at least ``k`` distinct rows); each
    epoch visits samples in a seeded permutation and moves the winning center
    by ``eta(t) * (x - c)``. Centers that win nothing during an epoch are
    re-seeded afterwards.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidParameterError("k-means expects a 2-D sample matrix")
    if k < 1 or k > x.shape[0]:
        raise InvalidParameterError(f"k={k} must lie in 1..{x.shape[0]} (sample count)")
    rng = np.random.default_rng(config.seed)
    n_distinct = np.unique(x, axis=0).shape[0]
    centers = kmeans_pp_init(x, k, rng)

    history: list[float] = []
    repairs = 0
    for epoch in range(config.max_iters):
        eta = config.rate(epoch)
        wins = np.zeros(k, dtype=np.int64)
        for n in rng.permutation(x.shape[0]):
            diff = x[n] - centers
            j = int(np.argmin(np.einsum("ij,ij->i", diff, diff)))
            centers[j] += eta * diff[j]
            wins[j] += 1
        if np.any(wins == 0) and n_distinct >= k:
            repairs += _repair(x, centers, wins == 0)
        history.append(quantization_error(x, centers))
    return KMeansResult(centers, history[-1], history, repairs)
