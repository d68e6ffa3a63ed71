"""Learning machines for voxel classification and the shared decision rule."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from ..volume import MultispectralVolume, Volume, labels_from_flat
from ._common import TrainConfig, decide, sigmoid, soft_targets
from .fcm import FcmModel, assign_by_roi, fcm_cluster, fcm_memberships, fcm_objective
from .kmeans import KMEANS_DEFAULTS, KMeansResult, quantization_error, train_kmeans
from .mlp import MLP_DEFAULTS, MlpModel, mlp_forward, mlp_loss_and_grad, train_mlp
from .poly import POLY_DEFAULTS, PolyModel, monomials, poly_expand, poly_loss_and_grad, train_poly
from .rbf import RBF_OUTPUT_DEFAULTS, RbfModel, gaussian_activations, nearest_center_widths, train_rbf
from .serialize import dumps_model, load_model, model_from_dict, model_to_dict, save_model

_CHUNK = 1 << 16


def classify(model, volume: MultispectralVolume | Volume) -> Volume:
    """Label volume from a trained model.

    Supervised models take the multispectral volume; an :class:`FcmModel`
    takes the ADC volume. Voxels are processed in independent chunks.
    """
    if isinstance(model, FcmModel):
        if isinstance(volume, MultispectralVolume):
            if volume.n_bands != 1:
                raise InvalidInputError("FCM classifies a single-band (ADC) volume")
            volume = volume.band(0)
        return labels_from_flat(model.predict(volume.data.ravel(order="F")), volume.grid)
    if not isinstance(volume, MultispectralVolume):
        raise InvalidInputError("supervised models classify a multispectral volume")
    if volume.n_bands != model.n_inputs:
        raise InvalidInputError(f"model expects {model.n_inputs} bands, volume has {volume.n_bands}")
    feats = volume.features()
    out = np.empty(feats.shape[0], dtype=np.uint8)
    for start in range(0, feats.shape[0], _CHUNK):
        out[start:start + _CHUNK] = model.predict(feats[start:start + _CHUNK])
    return labels_from_flat(out, volume.grid)


__all__ = [
    "FcmModel", "KMeansResult", "MlpModel", "PolyModel", "RbfModel", "TrainConfig",
    "KMEANS_DEFAULTS", "MLP_DEFAULTS", "POLY_DEFAULTS", "RBF_OUTPUT_DEFAULTS",
    "assign_by_roi", "classify", "decide", "dumps_model", "fcm_cluster", "fcm_memberships",
    "fcm_objective", "gaussian_activations", "load_model", "mlp_forward", "mlp_loss_and_grad",
    "model_from_dict", "model_to_dict", "monomials", "nearest_center_widths", "poly_expand",
    "poly_loss_and_grad", "quantization_error", "save_model", "sigmoid", "soft_targets",
    "train_kmeans", "train_mlp", "train_poly", "train_rbf",
]
