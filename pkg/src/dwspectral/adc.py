"""Apparent diffusion coefficient maps.

For ``n`` experiments with ``b_1 = 0`` the map is the sample mean of the
per-experiment log-ratio estimates,

    ADC(u) = C / (n - 1) * sum_{i>=2} ln(f_1(u) / f_i(u)) / b_i

so a noiseless voxel returns ``C * D(u)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .volume import MultispectralVolume, Volume

MODES = ("faithful", "masked")


@dataclass(frozen=True)
class AdcConfig:
    c: float = 1.0
    floor: float = 1e-6

    def __post_init__(self):
        if not (np.isfinite(self.c) and self.c > 0):
            raise InvalidParameterError(f"C must be positive, got {self.c}")
        if not (np.isfinite(self.floor) and self.floor > 0):
            raise InvalidParameterError(f"floor must be positive, got {self.floor}")


def compute_adc_map(
    msvolume: MultispectralVolume,
    b_values: Sequence[float] | None = None,
    config: AdcConfig = AdcConfig(),
    artifact_mode: str = "faithful",
) -> Volume:
    """ADC map of a multispectral DW volume.

    ``faithful`` clamps every band to ``config.floor`` before taking logs and
    keeps negative estimates, which reproduces the noise artifacts of a plain
    scanner ADC map. ``masked`` writes 0 wherever any band is at or below the
    floor and clips negative estimates to 0.
    """
    if artifact_mode not in MODES:
        raise InvalidParameterError(f"artifact_mode must be one of {MODES}")
    if b_values is None:
        b_values = msvolume.b_values
    b = np.asarray(b_values, dtype=np.float64)
    if msvolume.n_bands < 2:
        raise InvalidInputError("ADC needs at least two bands")
    if b.shape != (msvolume.n_bands,):
        raise InvalidInputError(f"{b.size} b-values for {msvolume.n_bands} bands")
    if b[0] != 0:
        raise InvalidParameterError(f"first b-value must be 0, got {b[0]}")
    if np.any(b[1:] <= 0) or not np.all(np.isfinite(b)):
        raise InvalidParameterError(f"b-values after the first must be > 0: {b.tolist()}")

    f = msvolume.bands
    low = np.any(f <= config.floor, axis=0)
    logs = np.log(np.maximum(f, config.floor))
    acc = np.zeros(f.shape[1:])
    for i in range(1, f.shape[0]):
        acc += (logs[0] - logs[i]) / b[i]
    adc = config.c * acc / (f.shape[0] - 1)
    if artifact_mode == "masked":
        adc[low] = 0.0
        np.maximum(adc, 0.0, out=adc)
    return Volume(adc, kind="adc")
