"""Fuzzy c-means on the (scalar) ADC map."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateDataError, InvalidInputError, InvalidParameterError
from ..volume import N_CLASSES, Volume, labels_from_flat


@dataclass
class FcmModel:
    centroids: np.ndarray  # (c, dim)
    fuzzifier: float = 2.0
    cluster_to_class: list[int] = field(default_factory=list)
    replicate: int = 1
    objective: list[float] = field(default_factory=list)
    membership_error: list[float] = field(default_factory=list)
    iterations: int = 0
    eta0: float | None = None  # accepted for parity with the other learners; unused

    kind = "fcm"

    @property
    def c(self) -> int:
        return self.centroids.shape[0]

    def features(self, values: np.ndarray) -> np.ndarray:
        v = np.asarray(values, dtype=np.float64).reshape(-1, 1)
        return np.repeat(v, self.replicate, axis=1)

    def memberships(self, values: np.ndarray) -> np.ndarray:
        return fcm_memberships(self.features(values), self.centroids, self.fuzzifier)

    def clusters(self, values: np.ndarray) -> np.ndarray:
        return np.argmax(self.memberships(values), axis=1)

    def predict(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(self.cluster_to_class, dtype=np.uint8)[self.clusters(values)]


def _sq_dists(x, v):
    return ((x[:, None, :] - v[None, :, :]) ** 2).sum(axis=-1)


def fcm_memberships(x: np.ndarray, centroids: np.ndarray, m: float) -> np.ndarray:
    """``u_ij = 1 / sum_k (d_ij / d_ik)^(2/(m-1))``; a sample sitting on
    centroids shares its membership equally among them."""
    d2 = _sq_dists(x, centroids)
    zero = d2 == 0
    hit = zero.any(axis=1)
    u = np.empty_like(d2)
    if np.any(~hit):
        dd = d2[~hit]
        ratio = (dd / dd.min(axis=1, keepdims=True)) ** (-1.0 / (m - 1.0))
        u[~hit] = ratio / ratio.sum(axis=1, keepdims=True)
    if np.any(hit):
        z = zero[hit].astype(np.float64)
        u[hit] = z / z.sum(axis=1, keepdims=True)
    return u


def fcm_objective(x, u, centroids, m) -> float:
    return float(np.sum(u**m * _sq_dists(x, centroids)))


def class_map_by_centroid(centroids: np.ndarray) -> list[int]:
    """Highest centroid -> class 1 (CSF), next -> 2 (matter), ... lowest -> background."""
    order = np.argsort(-centroids[:, 0], kind="stable")
    mapping = [0] * centroids.shape[0]
    for rank, j in enumerate(order):
        mapping[int(j)] = rank + 1
    return mapping


def _fit(x, c, m, max_iters, tol):
    q = (np.arange(c) + 0.5) / c
    v = np.quantile(x, q, axis=0, method="nearest")
    objective, merr = [], []
    it = 0
    for it in range(1, max_iters + 1):
        u = fcm_memberships(x, v, m)
        merr.append(float(np.max(np.abs(u.sum(axis=1) - 1.0))))
        um = u**m
        v_new = (um.T @ x) / um.sum(axis=0)[:, None]
        objective.append(fcm_objective(x, u, v_new, m))
        shift = float(np.max(np.abs(v_new - v)))
        v = v_new
        if shift < tol:
            break
    return v, objective, merr, it


def fcm_cluster(
    values: Volume | np.ndarray,
    c: int = 3,
    fuzzifier: float = 2.0,
    max_iters: int = 200,
    tol: float = 1e-10,
    replicate: int = 1,
    eta0: float | None = 0.1,
    mask: np.ndarray | None = None,
) -> tuple[FcmModel, Volume | np.ndarray]:
    """Alternate membership and centroid updates until the largest centroid
    shift drops below ``tol`` or ``max_iters`` is reached.

    ``values`` is an ADC volume (or any array of scalars). ``replicate`` stacks
    each scalar that many times into a feature vector. ``eta0`` is stored but
    the standard alternating updates have no learning rate. Returns the model
    and the hard class labels (a label volume when given a volume).
    """
    if c < 1:
        raise InvalidParameterError("c must be >= 1")
    if not fuzzifier > 1:
        raise InvalidParameterError("fuzzifier must be > 1")
    if max_iters < 1 or replicate < 1:
        raise InvalidParameterError("max_iters and replicate must be >= 1")
    is_volume = isinstance(values, Volume)
    arr = values.data if is_volume else np.asarray(values, dtype=np.float64)
    flat = arr.ravel(order="F").astype(np.float64)
    sel = flat if mask is None else flat[np.asarray(mask, dtype=bool).ravel(order="F")]
    if not np.all(np.isfinite(sel)):
        raise InvalidInputError("FCM input contains non-finite values")
    if sel.size < c:
        raise InvalidParameterError(f"need at least c={c} samples, got {sel.size}")
    if np.unique(sel).size < c:
        raise DegenerateDataError(f"fewer than {c} distinct values")

    x = np.repeat(sel[:, None], replicate, axis=1)
    v, objective, merr, it = _fit(x, c, fuzzifier, max_iters, tol)
    if c > 1:
        gap = np.abs(v[:, None, 0] - v[None, :, 0]) + np.eye(c)
        if np.any(gap <= 1e-12 * max(1.0, float(np.abs(v).max()))):
            raise DegenerateDataError("centroids collapsed onto each other")

    model = FcmModel(v, fuzzifier, class_map_by_centroid(v), replicate, objective, merr, it, eta0)
    labels = model.predict(flat)
    if is_volume:
        return model, labels_from_flat(labels, values.grid)
    return model, labels.reshape(arr.shape, order="F")


def assign_by_roi(model: FcmModel, adc: Volume, roi: Volume) -> FcmModel:
    """Override the cluster -> class map by majority vote of ROI voxels."""
    clusters = model.clusters(adc.data.ravel(order="F"))
    r = roi.data.ravel(order="F")
    mapping = list(model.cluster_to_class)
    for j in range(model.c):
        votes = np.bincount(r[(clusters == j) & (r > 0)], minlength=N_CLASSES + 1)[1:]
        if votes.sum():
            mapping[j] = int(np.argmax(votes)) + 1
    model.cluster_to_class = mapping
    return model
