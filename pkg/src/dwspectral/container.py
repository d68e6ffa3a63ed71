"""Directory-based volume container.

A container is a directory holding ``meta.json`` and ``data.raw``. Signal and
ADC data are little-endian float32, labels are uint8; voxels are written
x-fastest, then y, then z, bands one after another.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidInputError
from .volume import Grid3, MultispectralVolume, Volume

FORMAT_NAME = "dwspectral-volume"
FORMAT_VERSION = 1
_DTYPES = {"f32le": np.dtype("<f4"), "u8": np.dtype("u1")}


def _write(path: Path, bands: np.ndarray, meta: dict) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    dtype = _DTYPES[meta["dtype"]]
    raw = b"".join(np.asarray(b).astype(dtype).tobytes(order="F") for b in bands)
    (path / "data.raw").write_bytes(raw)
    (path / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def write_volume(path, volume: Volume | MultispectralVolume) -> Path:
    """Write a single or multispectral volume; returns the container path."""
    if isinstance(volume, MultispectralVolume):
        bands = volume.bands
        meta = {"kind": "signal", "dtype": "f32le", "b_values": list(volume.b_values)}
    elif isinstance(volume, Volume):
        bands = volume.data[None]
        meta = {
            "kind": volume.kind,
            "dtype": "u8" if volume.kind == "labels" else "f32le",
            "b_values": [] if volume.b_value is None else [float(volume.b_value)],
        }
        if volume.kind == "labels":
            if np.any(volume.data < 0) or np.any(volume.data > 255):
                raise InvalidInputError("label values must fit in u8")
            meta["classes"] = {str(k): v for k, v in sorted(volume.classes.items())}
    else:
        raise InvalidInputError(f"cannot write {type(volume).__name__}")
    grid = Grid3.from_shape(bands.shape[1:])
    meta.update(
        format=FORMAT_NAME,
        version=FORMAT_VERSION,
        grid=[grid.nx, grid.ny, grid.nz],
        bands=int(bands.shape[0]),
    )
    return _write(path, bands, meta)


def read_meta(path) -> dict:
    path = Path(path)
    try:
        meta = json.loads((path / "meta.json").read_text())
    except FileNotFoundError:
        raise InvalidInputError(f"no volume container at {path}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}/meta.json: {exc}") from None
    if meta.get("format") != FORMAT_NAME:
        raise FormatError(f"{path}: not a {FORMAT_NAME} container")
    if meta.get("dtype") not in _DTYPES:
        raise FormatError(f"{path}: unsupported dtype {meta.get('dtype')!r}")
    return meta


def _read_bands(path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    meta = read_meta(path)
    grid = Grid3(*meta["grid"])
    n = int(meta.get("bands", 1))
    dtype = _DTYPES[meta["dtype"]]
    raw = (path / "data.raw").read_bytes()
    if len(raw) != n * grid.size * dtype.itemsize:
        raise FormatError(
            f"{path}/data.raw holds {len(raw)} bytes, expected {n * grid.size * dtype.itemsize}"
        )
    flat = np.frombuffer(raw, dtype=dtype)
    bands = np.stack([flat[i * grid.size:(i + 1) * grid.size].reshape(grid.shape, order="F") for i in range(n)])
    return bands, meta


def read_volume(path) -> Volume:
    bands, meta = _read_bands(path)
    if bands.shape[0] != 1:
        raise InvalidInputError(f"{path} holds {bands.shape[0]} bands; use read_multispectral")
    if meta["kind"] == "labels":
        classes = {int(k): v for k, v in meta.get("classes", {}).items()} or None
        return Volume(bands[0].astype(np.uint8), kind="labels", classes=classes)
    b = meta.get("b_values") or [None]
    return Volume(bands[0].astype(np.float64), kind=meta["kind"], b_value=b[0])


def read_multispectral(path) -> MultispectralVolume:
    bands, meta = _read_bands(path)
    if meta["kind"] == "labels":
        raise InvalidInputError(f"{path} is a label volume")
    return MultispectralVolume(bands.astype(np.float64), meta.get("b_values") or [])
