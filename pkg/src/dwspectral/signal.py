"""Diffusion-weighted volume synthesis.

Each voxel follows the spin-echo signal model

    f_i(u) = K * rho(u) * exp(-TE / T2(u)) * exp(-b_i * D(u))

with ``b_i`` in s/mm^2 and ``D`` in mm^2/s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import InvalidGeometryError, InvalidInputError, InvalidParameterError
from .volume import BACKGROUND, CSF, MATTER, Grid3, MultispectralVolume, Volume

GAMMA_PROTON = 2.675e8  # rad s^-1 T^-1
DEFAULT_B_VALUES = (0.0, 500.0, 1000.0)
DEFAULT_TE = 0.1  # s
DEFAULT_GRID = Grid3(128, 128, 20)

# Tissue ids 1-3 coincide with the class labels; extra tissues map onto a class.
SKULL = 4
WHITE_MATTER = 5


def _finite(**values):
    for name, v in values.items():
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError(f"{name} must be finite, got {v!r}")


def compute_b_value(gamma: float, gradient: float, te: float) -> float:
    """Diffusion exponent ``(1/3) gamma^2 G^2 TE^3`` converted to s/mm^2.

    ``gamma`` in rad/(s T), ``gradient`` in T/m, ``te`` in seconds.
    """
    _finite(gamma=gamma, gradient=gradient, te=te)
    if gamma <= 0 or te <= 0 or gradient < 0:
        raise InvalidParameterError("need gamma > 0, te > 0 and gradient >= 0")
    return gamma**2 * gradient**2 * te**3 / 3.0 / 1e6


def gradient_for_b_value(gamma: float, b_value: float, te: float) -> float:
    """Inverse of :func:`compute_b_value` for the gradient amplitude."""
    _finite(gamma=gamma, b_value=b_value, te=te)
    if gamma <= 0 or te <= 0 or b_value < 0:
        raise InvalidParameterError("need gamma > 0, te > 0 and b_value >= 0")
    return math.sqrt(3.0 * b_value * 1e6 / (gamma**2 * te**3))


@dataclass(frozen=True)
class AcquisitionParams:
    b_values: tuple[float, ...] = DEFAULT_B_VALUES
    te: float = DEFAULT_TE
    gamma: float = GAMMA_PROTON
    gradients: tuple[float, ...] | None = None

    def __post_init__(self):
        b = tuple(float(v) for v in self.b_values)
        object.__setattr__(self, "b_values", b)
        _finite(b_values=b, te=self.te, gamma=self.gamma)
        if len(b) < 1:
            raise InvalidParameterError("at least one b-value is required")
        if b[0] != 0.0:
            raise InvalidParameterError(f"first b-value must be 0 (T2-weighted reference), got {b[0]}")
        if any(v < 0 for v in b) or any(b2 < b1 for b1, b2 in zip(b, b[1:])):
            raise InvalidParameterError(f"b-values must be non-negative and non-decreasing: {b}")
        if self.te <= 0 or self.gamma <= 0:
            raise InvalidParameterError("te and gamma must be positive")
        if self.gradients is not None:
            g = tuple(float(v) for v in self.gradients)
            object.__setattr__(self, "gradients", g)
            if len(g) != len(b):
                raise InvalidParameterError(f"{len(g)} gradients for {len(b)} b-values")
            for gi, bi in zip(g, b):
                expected = compute_b_value(self.gamma, gi, self.te)
                if abs(expected - bi) > 1e-9 * max(abs(bi), abs(expected)):
                    raise InvalidParameterError(
                        f"b-value {bi} inconsistent with gradient {gi} (gives {expected})"
                    )

    @classmethod
    def from_gradients(cls, gradients: Sequence[float], te: float = DEFAULT_TE, gamma: float = GAMMA_PROTON):
        b = tuple(compute_b_value(gamma, g, te) for g in gradients)
        return cls(b_values=b, te=te, gamma=gamma, gradients=tuple(gradients))


@dataclass(frozen=True)
class TissueClassParams:
    """Physical parameters of one tissue.

    ``label`` is the class the tissue belongs to; several tissues may share a
    class (the skull is background).
    """

    name: str
    label: int
    rho: float
    t2: float
    d: float

    def __post_init__(self):
        _finite(rho=self.rho, t2=self.t2, d=self.d)
        if self.rho < 0 or self.d < 0:
            raise InvalidParameterError(f"{self.name}: rho and d must be >= 0")


def default_tissues() -> dict[int, TissueClassParams]:
    return {
        CSF: TissueClassParams("csf", CSF, rho=1.0, t2=2.0, d=3.0e-3),
        MATTER: TissueClassParams("gray_matter", MATTER, rho=0.85, t2=0.10, d=0.85e-3),
        WHITE_MATTER: TissueClassParams("white_matter", MATTER, rho=0.70, t2=0.08, d=0.70e-3),
        BACKGROUND: TissueClassParams("background", BACKGROUND, rho=0.0, t2=1.0, d=0.0),
        SKULL: TissueClassParams("skull", BACKGROUND, rho=0.25, t2=0.06, d=1.0e-3),
    }


@dataclass
class Phantom:
    """Tissue id per voxel plus per-tissue physical parameters."""

    labels: np.ndarray
    tissues: dict[int, TissueClassParams] = field(default_factory=default_tissues)
    k: float = 1000.0

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        if self.labels.ndim != 3:
            raise InvalidInputError("phantom labels must be 3-D")
        missing = set(np.unique(self.labels).tolist()) - set(self.tissues)
        if missing:
            raise InvalidParameterError(f"labels without tissue parameters: {sorted(missing)}")
        if not (self.k > 0 and math.isfinite(self.k)):
            raise InvalidParameterError("K must be positive")
        bg = self.tissues.get(BACKGROUND)
        if bg is not None and bg.rho != 0:
            raise InvalidParameterError("background tissue must have rho = 0")
        csf, matter = self.tissues.get(CSF), self.tissues.get(MATTER)
        if csf is not None and matter is not None and not csf.d > matter.d:
            raise InvalidParameterError("CSF diffusion must exceed matter diffusion")

    @property
    def grid(self) -> Grid3:
        return Grid3.from_shape(self.labels.shape)

    def _lookup(self, attr: str, dtype=np.float64) -> np.ndarray:
        table = np.zeros(max(self.tissues) + 1, dtype=dtype)
        for tid, p in self.tissues.items():
            table[tid] = getattr(p, attr)
        return table[self.labels]

    def class_labels(self) -> Volume:
        """Ground-truth class volume (values in {1, 2, 3})."""
        return Volume(self._lookup("label", np.uint8), kind="labels")

    def head_mask(self) -> np.ndarray:
        """Voxels that carry signal in the noiseless model."""
        return self._lookup("rho") > 0

    def brain_mask(self) -> np.ndarray:
        return self._lookup("label", np.uint8) != BACKGROUND


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "none"
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "rician"):
            raise InvalidParameterError(f"unknown noise kind {self.kind!r}")
        _finite(sigma=self.sigma)
        if self.sigma < 0:
            raise InvalidParameterError(f"noise sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class GeometrySpec:
    """Head geometry in normalized coordinates.

    Positions and radii are fractions of the half-extent of each grid axis,
    measured from the grid centre. The head may extend past the slab along z
    (an axial slab through a larger head); in-plane it must fit the grid.
    """

    head_radii: tuple[float, float, float] = (0.80, 0.90, 1.25)
    white_matter_radius: float = 0.72
    skull_thickness: float = 0.06
    ventricle_radii: tuple[float, float, float] = (0.085, 0.24, 0.45)
    ventricle_offset: tuple[float, float, float] = (0.13, 0.02, 0.0)
    sulci_depth: float = 0.08
    sulci_count: int = 28
    sulci_fraction: float = 0.35


def _normalized_coords(grid: Grid3):
    axes = [(np.arange(n) - (n - 1) / 2.0) / (n / 2.0) for n in grid.shape]
    return np.meshgrid(*axes, indexing="ij")


def make_brain_phantom(
    grid: Grid3 = DEFAULT_GRID,
    geometry: GeometrySpec | None = None,
    tissues: dict[int, TissueClassParams] | None = None,
    k: float = 1000.0,
) -> Phantom:
    """Ellipsoidal head with skull shell, two ventricle lobes and a sulcal band."""
    g = geometry or GeometrySpec()
    hx, hy, hz = g.head_radii
    if min(g.head_radii) <= 0 or g.skull_thickness < 0:
        raise InvalidGeometryError("head radii must be positive and skull thickness >= 0")
    outer = 1.0 + g.skull_thickness
    if hx * outer > 1.0 or hy * outer > 1.0:
        raise InvalidGeometryError("head and skull exceed the in-plane grid bounds")
    if not 0 <= g.sulci_depth < 1 or not 0 <= g.sulci_fraction <= 1 or g.sulci_count < 0:
        raise InvalidGeometryError("sulci band parameters out of range")
    vr = g.ventricle_radii
    if min(vr) < 0:
        raise InvalidGeometryError("ventricle radii must be >= 0")
    has_ventricles = min(vr) > 0
    if has_ventricles:
        # both lobes must sit inside the brain ellipsoid and the grid
        for sign in (-1.0, 1.0):
            c = (sign * g.ventricle_offset[0], g.ventricle_offset[1], g.ventricle_offset[2])
            for axis, (ci, ri) in enumerate(zip(c, vr)):
                if abs(ci) + ri > 1.0:
                    raise InvalidGeometryError(f"ventricle lobe exceeds grid bounds on axis {axis}")
            extreme = sum(((abs(ci) + ri) / h) ** 2 for ci, ri, h in zip(c, vr, g.head_radii))
            if extreme > 1.0 + 1e-12:
                raise InvalidGeometryError("ventricle lobe extends outside the head")

    u, v, w = _normalized_coords(grid)
    r = np.sqrt((u / hx) ** 2 + (v / hy) ** 2 + (w / hz) ** 2)
    labels = np.full(grid.shape, BACKGROUND, dtype=np.uint8)
    labels[(r > 1.0) & (r <= outer)] = SKULL
    brain = r <= 1.0
    labels[brain] = MATTER
    labels[r <= g.white_matter_radius] = WHITE_MATTER

    if g.sulci_count and g.sulci_fraction and g.sulci_depth:
        theta = np.arctan2(v / hy, u / hx)
        phase = np.mod(theta * g.sulci_count / (2 * np.pi), 1.0)
        labels[brain & (r > 1.0 - g.sulci_depth) & (phase < g.sulci_fraction)] = CSF

    if has_ventricles:
        for sign in (-1.0, 1.0):
            cx, cy, cz = sign * g.ventricle_offset[0], g.ventricle_offset[1], g.ventricle_offset[2]
            lobe = ((u - cx) / vr[0]) ** 2 + ((v - cy) / vr[1]) ** 2 + ((w - cz) / vr[2]) ** 2 <= 1.0
            labels[lobe] = CSF

    return Phantom(labels, tissues if tissues is not None else default_tissues(), k)


def _apply_noise(data: np.ndarray, model: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    if model.kind == "none" or model.sigma == 0:
        return data
    n1 = rng.normal(0.0, model.sigma, size=data.shape)
    if model.kind == "gaussian":
        return data + n1
    n2 = rng.normal(0.0, model.sigma, size=data.shape)
    return np.sqrt((data + n1) ** 2 + n2**2)


def add_noise(volume: Volume, noise_model: NoiseModel) -> Volume:
    """Return a noisy copy; ``kind="none"`` or ``sigma=0`` returns the input unchanged."""
    rng = np.random.default_rng(noise_model.seed)
    out = _apply_noise(volume.data, noise_model, rng)
    if out is volume.data:
        return volume
    return replace(volume, data=out)


def noiseless_signal(phantom: Phantom, params: AcquisitionParams, b: float) -> np.ndarray:
    t2 = phantom._lookup("t2")
    if np.any(t2 <= 0):
        raise InvalidParameterError("T2 must be > 0 for every tissue present")
    rho = phantom._lookup("rho")
    d = phantom._lookup("d")
    return phantom.k * rho * np.exp(-params.te / t2) * np.exp(-b * d)


def synthesize_dwi(
    phantom: Phantom, params: AcquisitionParams, noise_model: NoiseModel = NoiseModel()
) -> MultispectralVolume:
    """One band per b-value.

    Noise is drawn from an independent stream per band, keyed on
    ``(seed, band index)``, so results do not depend on evaluation order.
    """
    if len(params.b_values) < 2:
        raise InvalidParameterError("synthesis needs at least two b-values")
    bands = []
    for i, b in enumerate(params.b_values):
        clean = noiseless_signal(phantom, params, b)
        rng = np.random.default_rng([noise_model.seed, i])
        bands.append(_apply_noise(clean, noise_model, rng))
    return MultispectralVolume(np.stack(bands), list(params.b_values))


def sigma_for_snr(phantom: Phantom, params: AcquisitionParams, snr: float) -> float:
    """Noise level giving ``snr`` relative to the mean b=0 signal inside the brain."""
    if not snr > 0:
        raise InvalidParameterError("snr must be positive")
    s0 = noiseless_signal(phantom, params, 0.0)
    brain = phantom.brain_mask()
    if not brain.any():
        raise InvalidInputError("phantom has no brain voxels")
    return float(s0[brain].mean() / snr)
