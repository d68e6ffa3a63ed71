"""Volume containers shared by every stage.

Arrays are indexed ``[x, y, z]``. On disk the voxel order is x-fastest, which
is Fortran order for that indexing.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, InvalidParameterError

KINDS = ("signal", "adc", "labels")

#: Class universe: 1 = CSF, 2 = white+gray matter, 3 = background.
CSF, MATTER, BACKGROUND = 1, 2, 3
CLASS_NAMES = {CSF: "csf", MATTER: "matter", BACKGROUND: "background"}
N_CLASSES = 3


@dataclass(frozen=True)
class Grid3:
    nx: int
    ny: int
    nz: int

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            v = getattr(self, name)
            if int(v) != v or v <= 0:
                raise InvalidParameterError(f"grid dimension {name}={v!r} must be a positive integer")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def size(self) -> int:
        return self.nx * self.ny * self.nz

    @classmethod
    def from_shape(cls, shape: Sequence[int]) -> "Grid3":
        if len(shape) != 3:
            raise InvalidInputError(f"expected a 3-D shape, got {tuple(shape)}")
        return cls(*(int(s) for s in shape))


@dataclass
class Volume:
    """One scalar field over a :class:`Grid3`.

    ``classes`` is only meaningful for label volumes and maps label value to
    class name.
    """

    data: np.ndarray
    kind: str = "signal"
    b_value: float | None = None
    classes: dict[int, str] | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 3:
            raise InvalidInputError(f"volume data must be 3-D, got shape {self.data.shape}")
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown volume kind {self.kind!r}")
        if self.kind == "labels":
            if self.classes is None:
                self.classes = dict(CLASS_NAMES)
        elif not np.issubdtype(self.data.dtype, np.floating):
            self.data = self.data.astype(np.float64)

    @property
    def grid(self) -> Grid3:
        return Grid3.from_shape(self.data.shape)


@dataclass
class MultispectralVolume:
    """``n`` co-registered bands; ``bands[i]`` is experiment ``i``.

    The per-voxel feature vector is ``bands[:, x, y, z]``.
    """

    bands: np.ndarray
    b_values: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.bands = np.asarray(self.bands, dtype=np.float64)
        if self.bands.ndim != 4:
            raise InvalidInputError(f"multispectral data must be 4-D (band, x, y, z), got {self.bands.shape}")
        self.b_values = [float(b) for b in self.b_values]
        if self.b_values and len(self.b_values) != self.bands.shape[0]:
            raise InvalidInputError(
                f"{len(self.b_values)} b-values given for {self.bands.shape[0]} bands"
            )

    @property
    def n_bands(self) -> int:
        return self.bands.shape[0]

    @property
    def grid(self) -> Grid3:
        return Grid3.from_shape(self.bands.shape[1:])

    def band(self, i: int) -> Volume:
        b = self.b_values[i] if self.b_values else None
        return Volume(self.bands[i], kind="signal", b_value=b)

    def features(self) -> np.ndarray:
        """Voxel-major feature matrix, shape ``(n_voxels, n_bands)``, x-fastest."""
        return self.bands.reshape(self.n_bands, -1, order="F").T

    def __len__(self) -> int:
        return self.n_bands


def labels_from_flat(flat: np.ndarray, grid: Grid3) -> Volume:
    """Inverse of :meth:`MultispectralVolume.features` for a label vector."""
    return Volume(np.asarray(flat, dtype=np.uint8).reshape(grid.shape, order="F"), kind="labels")
