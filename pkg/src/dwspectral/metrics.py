"""Confusion matrix, global accuracy, kappa and class volume percentages.

Confusion matrices follow the convention ``t[i, j]`` = number of objects of
true class ``j`` classified as class ``i`` (rows predicted, columns truth).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidInputError, UndefinedKappaError
from .volume import N_CLASSES, Volume


def _labels(v) -> np.ndarray:
    return np.asarray(v.data if isinstance(v, Volume) else v)


def confusion_matrix(truth, predicted, n_classes: int = N_CLASSES) -> np.ndarray:
    """Integer count matrix for labels in ``1..n_classes``."""
    t = _labels(truth)
    p = _labels(predicted)
    if t.shape != p.shape:
        raise InvalidInputError(f"grid mismatch: truth {t.shape} vs predicted {p.shape}")
    t = t.ravel().astype(np.int64)
    p = p.ravel().astype(np.int64)
    for name, a in (("truth", t), ("predicted", p)):
        if a.size and (a.min() < 1 or a.max() > n_classes):
            raise InvalidInputError(f"{name} labels outside 1..{n_classes}")
    idx = (p - 1) * n_classes + (t - 1)
    return np.bincount(idx, minlength=n_classes * n_classes).reshape(n_classes, n_classes)


def _check(t) -> np.ndarray:
    t = np.asarray(t)
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.size == 0:
        raise InvalidInputError("confusion matrix must be square and non-empty")
    if np.any(t < 0):
        raise InvalidInputError("confusion matrix entries must be >= 0")
    if t.sum() <= 0:
        raise InvalidInputError("confusion matrix is empty")
    return t


def global_accuracy(t) -> float:
    """Fraction of correctly classified objects, ``trace(T) / sum(T)``."""
    t = _check(t)
    return float(np.trace(t) / t.sum())


def chance_agreement(t, literal: bool = False) -> float:
    """Expected agreement ``sum_i row_i * col_i / N^2``.

    ``literal=True`` divides by the sum of squared cells instead of ``N^2``
    (kept only for comparison; it is not a probability).
    """
    t = _check(t).astype(np.float64)
    num = float(np.sum(t.sum(axis=1) * t.sum(axis=0)))
    den = float(np.sum(t**2)) if literal else float(t.sum()) ** 2
    return num / den


def kappa(t, literal: bool = False) -> float:
    phi = global_accuracy(t)
    rho_z = chance_agreement(t, literal)
    if rho_z == 1.0:
        raise UndefinedKappaError("chance agreement is 1; kappa is undefined")
    return (phi - rho_z) / (1.0 - rho_z)


@dataclass(frozen=True)
class AgreementReport:
    phi: float
    rho_z: float
    kappa: float

    @classmethod
    def of(cls, t, literal: bool = False) -> "AgreementReport":
        return cls(global_accuracy(t), chance_agreement(t, literal), kappa(t, literal))


@dataclass(frozen=True)
class VolumeReport:
    v_percent: tuple[float, ...]
    fluid_matter_ratio: float | None  # None when the matter volume is zero
    counts: tuple[int, ...]


def volume_report(labels, domain: np.ndarray | None = None, n_classes: int = N_CLASSES) -> VolumeReport:
    """Per-class volume percentage over the domain (default: whole grid)."""
    data = _labels(labels)
    if domain is not None:
        domain = np.asarray(domain, dtype=bool)
        if domain.shape != data.shape:
            raise InvalidInputError("domain mask does not match the label grid")
        data = data[domain]
    total = int(data.size)
    if total == 0:
        raise InvalidInputError("empty evaluation domain")
    counts = tuple(int(np.count_nonzero(data == c)) for c in range(1, n_classes + 1))
    if sum(counts) != total:
        raise InvalidInputError(f"labels outside 1..{n_classes} inside the domain")
    pct = tuple(float(Fraction(100 * c, total)) for c in counts)
    ratio = None if counts[1] == 0 else counts[0] / counts[1]
    return VolumeReport(pct, ratio, counts)


def evaluation_report(truth, predictions: dict, literal: bool = False, domain=None) -> dict:
    """JSON-ready report: one entry per prediction, plus the truth volumes."""
    out = {"kappa_form": "literal" if literal else "standard", "methods": {}}
    for name, pred in predictions.items():
        if domain is None:
            t = confusion_matrix(truth, pred)
        else:
            t = confusion_matrix(_labels(truth)[domain], _labels(pred)[domain])
        agreement = AgreementReport.of(t, literal)
        vol = volume_report(pred, domain)
        out["methods"][name] = {
            "confusion_matrix": t.tolist(),
            "phi": agreement.phi,
            "rho_z": agreement.rho_z,
            "kappa": agreement.kappa,
            "v_percent": list(vol.v_percent),
            "fluid_matter_ratio": vol.fluid_matter_ratio,
        }
    vt = volume_report(truth, domain)
    out["truth"] = {"v_percent": list(vt.v_percent), "fluid_matter_ratio": vt.fluid_matter_ratio}
    return out


def format_tables(report: dict) -> str:
    """Aligned text tables: accuracy/kappa, then volume percentages and V1/V2."""
    names = list(report["methods"])
    vols = {n: report["methods"][n] for n in names}
    vols["truth"] = report["truth"]
    w = max(10, *(len(n) + 2 for n in vols))
    lines = ["".ljust(10) + "".join(n.rjust(w) for n in names)]
    lines.append("phi (%)".ljust(10) + "".join(f"{100 * report['methods'][n]['phi']:.4f}".rjust(w) for n in names))
    lines.append("kappa".ljust(10) + "".join(f"{report['methods'][n]['kappa']:.4f}".rjust(w) for n in names))
    lines.append("")
    lines.append("".ljust(10) + "".join(n.rjust(w) for n in vols))
    for i in range(3):
        lines.append(f"V{i + 1} (%)".ljust(10) + "".join(f"{vols[n]['v_percent'][i]:.3f}".rjust(w) for n in vols))
    ratio = ["undef" if vols[n]["fluid_matter_ratio"] is None else f"{vols[n]['fluid_matter_ratio']:.3f}" for n in vols]
    lines.append("V1/V2".ljust(10) + "".join(r.rjust(w) for r in ratio))
    return "\n".join(lines) + "\n"
