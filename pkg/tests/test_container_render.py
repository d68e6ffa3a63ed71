import json

import numpy as np
import pytest

from dwspectral import container
from dwspectral.errors import FormatError, InvalidInputError, InvalidParameterError
from dwspectral.render import CLASS_GRAY, decode_pgm, encode_pgm, label_image, render_labels, render_volume
from dwspectral.volume import MultispectralVolume, Volume


def test_signal_round_trip_bit_exact(tmp_path, rng):
    vol = Volume(rng.random((5, 4, 3)).astype(np.float32), kind="signal", b_value=500.0)
    container.write_volume(tmp_path / "v", vol)
    back = container.read_volume(tmp_path / "v")
    # float32 values survive exactly
    assert np.array_equal(back.data, vol.data)
    assert back.data.astype(np.float32).tobytes() == vol.data.astype(np.float32).tobytes()
    assert back.kind == "signal" and back.b_value == 500.0


def test_labels_and_multispectral_round_trip(tmp_path, rng):
    labels = Volume(rng.integers(1, 4, (6, 5, 2)).astype(np.uint8), kind="labels")
    container.write_volume(tmp_path / "l", labels)
    back = container.read_volume(tmp_path / "l")
    assert np.array_equal(back.data, labels.data) and back.classes == labels.classes

    ms = MultispectralVolume(rng.random((3, 4, 3, 2)).astype(np.float32), (0.0, 500.0, 1000.0))
    container.write_volume(tmp_path / "m", ms)
    got = container.read_multispectral(tmp_path / "m")
    assert np.array_equal(got.bands, ms.bands)
    assert tuple(got.b_values) == (0.0, 500.0, 1000.0)


def test_x_fastest_layout(tmp_path):
    data = np.arange(24, dtype=np.float32).reshape(4, 3, 2)
    container.write_volume(tmp_path / "v", Volume(data, kind="adc"))
    raw = np.fromfile(tmp_path / "v" / "data.raw", dtype="<f4")
    assert raw[:4].tolist() == data[:, 0, 0].tolist()
    assert json.loads((tmp_path / "v" / "meta.json").read_text())["dtype"] == "f32le"


def test_corrupt_container(tmp_path, rng):
    container.write_volume(tmp_path / "v", Volume(rng.random((3, 3, 3)).astype(np.float32), kind="adc"))
    raw = tmp_path / "v" / "data.raw"
    raw.write_bytes(raw.read_bytes()[:-4])
    with pytest.raises(FormatError):
        container.read_volume(tmp_path / "v")
    with pytest.raises((FormatError, InvalidInputError, FileNotFoundError)):
        container.read_volume(tmp_path / "missing")


def test_pgm_round_trip(rng):
    img = rng.integers(0, 256, (7, 5)).astype(np.uint8)
    raw = encode_pgm(img)
    assert raw.startswith(b"P5")
    assert np.array_equal(decode_pgm(raw), img)


def test_label_rendering(tmp_path):
    data = np.full((4, 4, 2), 3, np.uint8)
    data[1, 1, 1], data[2, 2, 1] = 1, 2
    labels = Volume(data, kind="labels")
    img = label_image(labels, 1)
    assert set(np.unique(img).tolist()) == {0, 128, 255}
    assert CLASS_GRAY[1] == 255 and CLASS_GRAY[2] == 128 and CLASS_GRAY[3] == 0
    path = render_labels(labels, 1, tmp_path / "s.pgm")
    assert np.array_equal(decode_pgm(path.read_bytes()), img)
    assert len(render_volume(labels, tmp_path / "all")) == 2
    with pytest.raises((InvalidParameterError, InvalidInputError)):
        label_image(labels, 2)
