"""Multispectral feature vectors and labeled training sets."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import ndimage

from .errors import InvalidInputError, InvalidParameterError, MissingClassError
from .signal import Phantom
from .volume import BACKGROUND, CSF, MATTER, N_CLASSES, MultispectralVolume, Volume

DEFAULT_ROI_SLICE = 12  # zero-based; the 13th of 20 slices


def stack_bands(volumes: Sequence[Volume]) -> MultispectralVolume:
    """Stack co-registered volumes into one multispectral volume, order preserved."""
    if not volumes:
        raise InvalidInputError("no volumes to stack")
    grid = volumes[0].grid
    for i, v in enumerate(volumes):
        if v.grid != grid:
            raise InvalidInputError(f"band {i} grid {v.grid.shape} differs from {grid.shape}")
    b = [v.b_value for v in volumes]
    return MultispectralVolume(np.stack([v.data for v in volumes]), b if None not in b else [])


@dataclass(frozen=True)
class Bounds:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise InvalidParameterError("bounds must be two vectors of equal length")
        if not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)) or np.any(hi <= lo):
            raise InvalidParameterError(f"degenerate normalization bounds: min={lo}, max={hi}")

    @classmethod
    def of(cls, features: np.ndarray) -> "Bounds":
        return cls(features.min(axis=0), features.max(axis=0))

    def to_json(self) -> dict:
        return {"min": self.lo.tolist(), "max": self.hi.tolist()}

    @classmethod
    def from_json(cls, doc: Mapping) -> "Bounds":
        return cls(doc["min"], doc["max"])


def normalize(x: np.ndarray, bounds: Bounds) -> np.ndarray:
    """Component-wise min-max scaling into [0, 1] (values outside are clamped)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != bounds.lo.size:
        raise InvalidInputError(f"feature length {x.shape[-1]} != bounds length {bounds.lo.size}")
    return np.clip((x - bounds.lo) / (bounds.hi - bounds.lo), 0.0, 1.0)


@dataclass
class TrainingSet:
    """Raw feature rows ``x``, class labels ``y`` (1..3) and per-band bounds."""

    x: np.ndarray
    y: np.ndarray
    bounds: Bounds
    n_classes: int = N_CLASSES

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.x.ndim != 2 or self.y.shape != (self.x.shape[0],):
            raise InvalidInputError("training set needs x of shape (n, bands) and y of shape (n,)")
        if self.x.shape[1] != self.bounds.lo.size:
            raise InvalidInputError("bounds do not match the feature length")
        if self.y.size and (self.y.min() < 1 or self.y.max() > self.n_classes):
            raise InvalidInputError(f"labels must lie in 1..{self.n_classes}")

    def __len__(self) -> int:
        return self.y.size

    @property
    def n_bands(self) -> int:
        return self.x.shape[1]

    def normalized(self) -> np.ndarray:
        return normalize(self.x, self.bounds)

    @classmethod
    def from_arrays(cls, x, y, bounds: Bounds | None = None, n_classes: int = N_CLASSES) -> "TrainingSet":
        """Convenience constructor; bounds default to the samples' own range."""
        x = np.asarray(x, dtype=np.float64)
        return cls(x, y, bounds or Bounds.of(x), n_classes)


def _masks_from(roi_masks, shape) -> dict[int, np.ndarray]:
    if isinstance(roi_masks, Volume):
        data = roi_masks.data
        return {c: data == c for c in range(1, N_CLASSES + 1)}
    masks = {int(c): np.asarray(m, dtype=bool) for c, m in roi_masks.items()}
    for c, m in masks.items():
        if m.shape != shape:
            raise InvalidInputError(f"mask for class {c} has shape {m.shape}, expected {shape}")
    total = sum(m.astype(np.int64) for m in masks.values())
    if np.any(total > 1):
        raise InvalidInputError("ROI masks overlap")
    return masks


def build_training_set(
    msvolume: MultispectralVolume,
    roi_masks: Volume | Mapping[int, np.ndarray],
    slice_filter: Iterable[int] | None = None,
) -> TrainingSet:
    """Collect labeled samples from ROI voxels on the selected slices.

    ``roi_masks`` is a label volume (0 = unlabeled) or a mapping class -> bool
    mask. Samples are ordered by flat voxel index (x-fastest), so the result
    does not depend on how the masks were built. Normalization bounds cover
    the whole volume.
    """
    shape = msvolume.grid.shape
    masks = _masks_from(roi_masks, shape)
    keep = np.ones(shape, dtype=bool)
    if slice_filter is not None:
        slices = sorted(set(int(s) for s in slice_filter))
        if not slices:
            raise InvalidParameterError("slice filter selects no slices")
        if slices[0] < 0 or slices[-1] >= shape[2]:
            raise InvalidParameterError(f"slice indices {slices} outside 0..{shape[2] - 1}")
        keep[:] = False
        keep[:, :, slices] = True

    label = np.zeros(shape, dtype=np.int64)
    for c in range(1, N_CLASSES + 1):
        m = masks.get(c)
        if m is None or not np.any(m & keep):
            raise MissingClassError(f"no ROI samples for class {c} on the selected slices")
        label[m & keep] = c
    flat_label = label.ravel(order="F")
    idx = np.flatnonzero(flat_label)
    feats = msvolume.features()
    return TrainingSet(feats[idx], flat_label[idx], Bounds.of(feats))


def _spread(mask: np.ndarray, limit: int | None) -> np.ndarray:
    """Keep at most ``limit`` voxels of ``mask``, evenly spaced in flat x-fastest order."""
    if limit is None:
        return mask
    idx = np.flatnonzero(mask.ravel(order="F"))
    if idx.size <= limit:
        return mask
    pick = idx[np.linspace(0, idx.size - 1, limit).round().astype(int)]
    out = np.zeros(mask.size, dtype=bool)
    out[pick] = True
    return out.reshape(mask.shape, order="F")


def make_roi_masks(
    phantom: Phantom,
    slice_index: int = DEFAULT_ROI_SLICE,
    max_per_class: int | None = 150,
    corner: int = 8,
    min_depth: float = 7.0,
) -> Volume:
    """Specialist-style ROIs on one slice of a phantom.

    CSF comes from the eroded ventricle interior, matter from gray and white
    matter at least ``min_depth`` voxels below the brain surface (clear of the
    sulci), background from the four in-plane corners.
    """
    nx, ny, nz = phantom.grid.shape
    if not 0 <= slice_index < nz:
        raise InvalidParameterError(f"slice {slice_index} outside 0..{nz - 1}")
    if 2 * corner > min(nx, ny) or corner < 1:
        raise InvalidParameterError("corner patches do not fit the slice")
    cls = phantom.class_labels().data[:, :, slice_index]
    brain = cls != BACKGROUND
    depth = ndimage.distance_transform_edt(brain)

    csf = ndimage.binary_erosion(cls == CSF, iterations=1)
    matter = ndimage.binary_erosion(cls == MATTER, iterations=2)
    matter &= depth >= min_depth
    bg = np.zeros_like(brain)
    for xs in (slice(0, corner), slice(nx - corner, nx)):
        for ys in (slice(0, corner), slice(ny - corner, ny)):
            bg[xs, ys] = True
    bg &= cls == BACKGROUND

    roi = np.zeros((nx, ny, nz), dtype=np.uint8)
    for c, m in ((CSF, csf), (MATTER, matter), (BACKGROUND, bg)):
        roi[:, :, slice_index][_spread(m, max_per_class)] = c
    return Volume(roi, kind="labels", classes={0: "unlabeled", 1: "csf", 2: "matter", 3: "background"})
