"""Slice export as binary PGM (P5, maxval 255).

Image rows run along y and columns along x.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .volume import BACKGROUND, CSF, MATTER, Volume

CLASS_GRAY = {BACKGROUND: 0, MATTER: 128, CSF: 255}


def encode_pgm(image: np.ndarray) -> bytes:
    image = np.asarray(image)
    if image.ndim != 2 or image.dtype != np.uint8:
        raise InvalidInputError("PGM export needs a 2-D uint8 image")
    h, w = image.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + image.tobytes(order="C")


def decode_pgm(raw: bytes) -> np.ndarray:
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5" or parts[2] != b"255":
        raise InvalidInputError("not an 8-bit P5 PGM")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def _slice(volume: Volume, slice_index: int) -> np.ndarray:
    nz = volume.grid.nz
    if not 0 <= slice_index < nz:
        raise InvalidInputError(f"slice {slice_index} outside 0..{nz - 1}")
    return volume.data[:, :, slice_index].T


def label_image(labels: Volume, slice_index: int) -> np.ndarray:
    """Background black, matter gray, CSF white; anything else black."""
    lut = np.zeros(256, dtype=np.uint8)
    for c, g in CLASS_GRAY.items():
        lut[c] = g
    return lut[_slice(labels, slice_index).astype(np.uint8)]


def signal_image(volume: Volume, slice_index: int, vmax: float | None = None) -> np.ndarray:
    """Linear gray scale from 0 (or the volume minimum if negative) to ``vmax``."""
    data = volume.data
    lo = min(0.0, float(data.min()))
    hi = float(data.max()) if vmax is None else float(vmax)
    if hi <= lo:
        return np.zeros(_slice(volume, slice_index).shape, dtype=np.uint8)
    s = (_slice(volume, slice_index) - lo) / (hi - lo)
    return np.round(np.clip(s, 0.0, 1.0) * 255).astype(np.uint8)


def render_labels(labels: Volume, slice_index: int, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_pgm(label_image(labels, slice_index)))
    return path


def render_volume(volume: Volume, out_dir, slices=None, prefix: str = "slice") -> list[Path]:
    """One PGM per slice; label volumes use class colors, others gray scale."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    slices = range(volume.grid.nz) if slices is None else slices
    paths = []
    for z in slices:
        img = label_image(volume, z) if volume.kind == "labels" else signal_image(volume, z)
        p = out_dir / f"{prefix}_{z:03d}.pgm"
        p.write_bytes(encode_pgm(img))
        paths.append(p)
    return paths
