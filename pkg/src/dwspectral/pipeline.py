"""End-to-end runs driven by one JSON-serializable configuration.

Every artifact written here is a pure function of the resolved config (which
includes the seed); timestamps go only to ``run.log``.
"""
from __future__ import annotations

import copy
import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import container
from .adc import AdcConfig, compute_adc_map
from .classifiers import (
    TrainConfig,
    classify,
    fcm_cluster,
    save_model,
    train_mlp,
    train_poly,
    train_rbf,
)
from .errors import InvalidInputError, InvalidParameterError
from .features import build_training_set, make_roi_masks
from .metrics import evaluation_report, format_tables
from .render import render_volume
from .signal import (
    AcquisitionParams,
    GeometrySpec,
    NoiseModel,
    Phantom,
    TissueClassParams,
    make_brain_phantom,
    sigma_for_snr,
    synthesize_dwi,
)
from .volume import Grid3, MultispectralVolume, Volume

log = logging.getLogger(__name__)

DEFAULT_CONFIG: dict = {
    "seed": None,
    "grid": [128, 128, 20],
    "geometry": {},
    "k": 1000.0,
    "acquisition": {"b_values": [0.0, 500.0, 1000.0], "te": 0.1},
    "noise": {"kind": "rician", "snr": 20.0},
    "roi": {"path": None, "slice": 12, "max_per_class": 150},
    "adc": {"c": 1.0, "floor": 1e-6, "mode": "faithful"},
    "mlp": {"eta0": 0.2, "eps": 0.05, "max_iters": 1000, "hidden": 60},
    "rbf": {"k": 18, "eta0_hidden": 0.1, "iters_hidden": 200, "eta0_out": 0.1, "iters_out": 200},
    "poly": {"eta0": 0.1, "eps": 0.05, "max_iters": 200, "degree": 2},
    "fcm": {"c": 3, "fuzzifier": 2.0, "max_iters": 200, "tol": 1e-10, "eta0": 0.1, "replicate": 1},
    "evaluation": {"kappa_literal": False, "slices": None},
    "render": {"slices": [12]},
}


def merge(base: dict, override: dict) -> dict:
    """Recursive dict merge; ``override`` wins, unknown top-level keys are rejected."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in out:
            raise InvalidParameterError(f"unknown config key {key!r}")
        if isinstance(out[key], dict) and isinstance(value, dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = value
    return out


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then the JSON file, then ``overrides`` (CLI flags)."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            cfg = merge(cfg, json.loads(Path(path).read_text()))
        except FileNotFoundError:
            raise InvalidInputError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"config file {path}: {exc}") from None
    return merge(cfg, overrides or {})


# -- stage helpers -----------------------------------------------------------

def phantom_from_config(cfg: dict) -> Phantom:
    geometry = GeometrySpec(**{k: tuple(v) if isinstance(v, list) else v for k, v in cfg["geometry"].items()})
    return make_brain_phantom(Grid3(*cfg["grid"]), geometry, k=cfg["k"])


def acquisition_from_config(cfg: dict) -> AcquisitionParams:
    acq = dict(cfg["acquisition"])
    acq["b_values"] = tuple(acq["b_values"])
    if acq.get("gradients") is not None:
        acq["gradients"] = tuple(acq["gradients"])
    return AcquisitionParams(**acq)


def noise_from_config(cfg: dict, phantom: Phantom, acq: AcquisitionParams, seed: int) -> NoiseModel:
    n = cfg["noise"]
    if n["kind"] == "none":
        return NoiseModel("none", 0.0, seed)
    if n.get("sigma") is not None:
        sigma = float(n["sigma"])
    else:
        sigma = sigma_for_snr(phantom, acq, float(n["snr"]))
    return NoiseModel(n["kind"], sigma, seed)


def save_phantom(path, phantom: Phantom) -> Path:
    path = Path(path)
    names = {tid: p.name for tid, p in phantom.tissues.items()}
    container.write_volume(path / "tissues", Volume(phantom.labels, kind="labels", classes=names))
    container.write_volume(path / "classes", phantom.class_labels())
    doc = {
        "k": phantom.k,
        "tissues": {str(tid): dataclasses.asdict(p) for tid, p in sorted(phantom.tissues.items())},
    }
    (path / "phantom.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def load_phantom(path) -> Phantom:
    path = Path(path)
    try:
        doc = json.loads((path / "phantom.json").read_text())
    except FileNotFoundError:
        raise InvalidInputError(f"no phantom at {path}") from None
    tissues = {int(t): TissueClassParams(**p) for t, p in doc["tissues"].items()}
    return Phantom(container.read_volume(path / "tissues").data, tissues, doc["k"])


def train_supervised(method: str, ts, cfg: dict, seed: int):
    if method == "mlp":
        c = cfg["mlp"]
        return train_mlp(ts, TrainConfig(c["eta0"], c["max_iters"], c["eps"], seed), c["hidden"])
    if method == "rbf":
        c = cfg["rbf"]
        return train_rbf(
            ts, c["k"], TrainConfig(c["eta0_hidden"], c["iters_hidden"], None, seed),
            TrainConfig(c["eta0_out"], c["iters_out"], None, seed),
        )
    if method == "poly":
        c = cfg["poly"]
        return train_poly(ts, TrainConfig(c["eta0"], c["max_iters"], c["eps"], seed), c["degree"])
    raise InvalidParameterError(f"unknown supervised method {method!r}")


def run_fcm(adc: Volume, cfg: dict):
    c = cfg["fcm"]
    return fcm_cluster(adc, c["c"], c["fuzzifier"], c["max_iters"], c["tol"], c["replicate"], c["eta0"])


def evaluation_domain(grid: Grid3, slices) -> np.ndarray | None:
    if slices is None:
        return None
    dom = np.zeros(grid.shape, dtype=bool)
    dom[:, :, list(slices)] = True
    return dom


@dataclass
class ExperimentResult:
    config: dict
    phantom: Phantom
    dwi: MultispectralVolume
    adc: Volume
    roi: Volume
    models: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict)  # "truth", "mlp", "rbf", "adc_cm"
    report: dict = field(default_factory=dict)


def run_experiment(cfg: dict) -> ExperimentResult:
    """Phantom -> DW volumes -> ADC -> four classifiers -> metrics, in memory.

    The degree-2 polynomial network classification is the truth volume.
    """
    seed = cfg.get("seed")
    if seed is None:
        raise InvalidParameterError("a seed is required for a reproducible run")
    seed = int(seed)
    phantom = phantom_from_config(cfg)
    acq = acquisition_from_config(cfg)
    noise = noise_from_config(cfg, phantom, acq, seed)
    dwi = synthesize_dwi(phantom, acq, noise)
    log.info("synthesized %d bands, noise %s sigma=%.6g", dwi.n_bands, noise.kind, noise.sigma)

    a = cfg["adc"]
    adc = compute_adc_map(dwi, acq.b_values, AdcConfig(a["c"], a["floor"]), a["mode"])

    r = cfg["roi"]
    if r.get("path"):
        roi = container.read_volume(r["path"])
        slices = None if r.get("slice") is None else [r["slice"]]
    else:
        roi = make_roi_masks(phantom, r["slice"], r["max_per_class"])
        slices = [r["slice"]]
    ts = build_training_set(dwi, roi, slices)

    res = ExperimentResult(cfg, phantom, dwi, adc, roi)
    for method in ("poly", "mlp", "rbf"):
        t0 = time.perf_counter()
        res.models[method] = train_supervised(method, ts, cfg, seed)
        log.info("trained %s in %.2fs", method, time.perf_counter() - t0)
    res.labels["truth"] = classify(res.models["poly"], dwi)
    res.labels["mlp"] = classify(res.models["mlp"], dwi)
    res.labels["rbf"] = classify(res.models["rbf"], dwi)
    res.models["fcm"], res.labels["adc_cm"] = run_fcm(adc, cfg)

    ev = cfg["evaluation"]
    preds = {k: res.labels[k] for k in ("mlp", "rbf", "adc_cm")}
    res.report = evaluation_report(
        res.labels["truth"], preds, ev["kappa_literal"], evaluation_domain(dwi.grid, ev["slices"])
    )
    res.report["phantom"] = evaluation_report(phantom.class_labels(), {"truth": res.labels["truth"]})["methods"]["truth"]
    return res


def write_report(path_json, path_txt, report: dict) -> None:
    Path(path_json).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    if path_txt is not None:
        Path(path_txt).write_text(format_tables(report))


def run_pipeline(cfg: dict, out_dir) -> ExperimentResult:
    """Run :func:`run_experiment` and write every artifact under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out / "run.log", mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("dwspectral")
    root.addHandler(handler)
    root.setLevel(logging.INFO)
    try:
        res = run_experiment(cfg)
        (out / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
        save_phantom(out / "phantom", res.phantom)
        container.write_volume(out / "roi", res.roi)
        container.write_volume(out / "dwi", res.dwi)
        container.write_volume(out / "adc", res.adc)
        for name, model in res.models.items():
            save_model(out / "models" / f"{name}.json", model)
        for name, labels in res.labels.items():
            container.write_volume(out / "labels" / name, labels)
        write_report(out / "report.json", out / "report.txt", res.report)
        slices = cfg["render"]["slices"]
        for name, labels in res.labels.items():
            render_volume(labels, out / "render" / name, slices)
        for i in range(res.dwi.n_bands):
            render_volume(res.dwi.band(i), out / "render" / f"dwi_b{int(res.dwi.b_values[i])}", slices)
        log.info("pipeline finished")
        return res
    finally:
        root.removeHandler(handler)
        handler.close()
