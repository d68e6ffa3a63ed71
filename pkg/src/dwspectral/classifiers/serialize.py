"""Versioned JSON documents for trained models.

Floats are written with ``repr`` precision, so a save/load round trip
reproduces every weight exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import FormatError
from ..features import Bounds
from ._common import TrainConfig
from .fcm import FcmModel
from .mlp import MlpModel
from .poly import PolyModel
from .rbf import RbfModel

FORMAT_NAME = "dwspectral-model"
FORMAT_VERSION = 1


def _arr(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=np.float64)
    return {"shape": list(a.shape), "data": a.ravel().tolist()}


def _unarr(doc: dict) -> np.ndarray:
    return np.asarray(doc["data"], dtype=np.float64).reshape(doc["shape"])


def _cfg(cfg: TrainConfig | None):
    return None if cfg is None else cfg.to_json()


def _uncfg(doc):
    return None if doc is None else TrainConfig(**doc)


def model_to_dict(model) -> dict:
    doc = {"format": FORMAT_NAME, "version": FORMAT_VERSION, "kind": model.kind}
    if isinstance(model, MlpModel):
        doc["architecture"] = {"inputs": model.w1.shape[1], "hidden": model.w1.shape[0],
                               "outputs": model.w2.shape[0], "activation": "logistic"}
        doc["weights"] = {k: _arr(v) for k, v in model.params.items()}
        doc["train_config"] = _cfg(model.config)
        doc["training"] = {"final_error": model.final_error, "epochs": model.epochs}
    elif isinstance(model, RbfModel):
        doc["architecture"] = {"inputs": model.centers.shape[1], "centers": model.centers.shape[0],
                               "outputs": model.weights.shape[0], "activation": "logistic"}
        doc["weights"] = {"centers": _arr(model.centers), "widths": _arr(model.widths),
                          "weights": _arr(model.weights), "bias": _arr(model.bias)}
        doc["train_config"] = {"hidden": _cfg(model.hidden_config), "output": _cfg(model.output_config)}
        doc["training"] = {"quantization_error": model.quantization_error,
                           "final_error": model.final_error, "epochs": model.epochs}
    elif isinstance(model, PolyModel):
        doc["architecture"] = {"inputs": model.n_inputs, "degree": model.degree,
                               "terms": model.weights.shape[1], "outputs": model.weights.shape[0],
                               "activation": "logistic"}
        doc["weights"] = {"weights": _arr(model.weights)}
        doc["train_config"] = _cfg(model.config)
        doc["training"] = {"final_error": model.final_error, "epochs": model.epochs}
    elif isinstance(model, FcmModel):
        doc["architecture"] = {"clusters": model.c, "fuzzifier": model.fuzzifier, "replicate": model.replicate}
        doc["weights"] = {"centroids": _arr(model.centroids)}
        doc["cluster_to_class"] = list(model.cluster_to_class)
        doc["train_config"] = {"eta0": model.eta0}
        doc["training"] = {"iterations": model.iterations,
                           "final_objective": model.objective[-1] if model.objective else None}
        return doc
    else:
        raise FormatError(f"cannot serialize {type(model).__name__}")
    doc["normalization"] = model.bounds.to_json()
    return doc


def model_from_dict(doc: dict):
    if doc.get("format") != FORMAT_NAME:
        raise FormatError("not a dwspectral model document")
    if doc.get("version") != FORMAT_VERSION:
        raise FormatError(f"unsupported model version {doc.get('version')!r}")
    kind = doc.get("kind")
    w = {k: _unarr(v) for k, v in doc["weights"].items()}
    if kind == "fcm":
        arch = doc["architecture"]
        final = doc["training"].get("final_objective")
        return FcmModel(w["centroids"], arch["fuzzifier"], list(doc["cluster_to_class"]),
                        arch["replicate"], objective=[] if final is None else [final],
                        iterations=doc["training"]["iterations"],
                        eta0=doc["train_config"]["eta0"])
    bounds = Bounds.from_json(doc["normalization"])
    tr = doc.get("training", {})
    if kind == "mlp":
        return MlpModel(w["w1"], w["b1"], w["w2"], w["b2"], bounds, _uncfg(doc["train_config"]),
                        tr.get("final_error"), tr.get("epochs", 0))
    if kind == "rbf":
        cfg = doc["train_config"]
        return RbfModel(w["centers"], w["widths"], w["weights"], w["bias"], bounds,
                        _uncfg(cfg["hidden"]), _uncfg(cfg["output"]), tr.get("quantization_error"),
                        tr.get("final_error"), tr.get("epochs", 0))
    if kind == "poly":
        return PolyModel(w["weights"], bounds, doc["architecture"]["degree"], _uncfg(doc["train_config"]),
                         tr.get("final_error"), tr.get("epochs", 0))
    raise FormatError(f"unknown model kind {kind!r}")


def dumps_model(model) -> str:
    return json.dumps(model_to_dict(model), indent=1, sort_keys=True) + "\n"


def save_model(path, model) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_model(model))
    return path


def load_model(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return model_from_dict(doc)
