"""Binary codec round-trips and on-disk layout checks."""
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panopt3d import (CodecError, PanopticLabels, PointCloud, decode_labels,
                      encode_labels, read_confidence, read_labels,
                      read_offsets, read_point_cloud, write_confidence,
                      write_labels, write_offsets, write_point_cloud)


def test_decode_known_word():
    # low 16 bits semantic, high 16 bits instance
    labels = decode_labels(np.array([0x00010009], dtype=np.uint32))
    assert labels.semantic[0] == 9
    assert labels.instance[0] == 1


def test_encode_known_word():
    labels = PanopticLabels(semantic=np.array([9], dtype=np.uint32),
                            instance=np.array([1], dtype=np.uint32))
    assert encode_labels(labels)[0] == 0x00010009


@pytest.mark.parametrize("sem,inst", [(0, 0), (1, 0), (0, 1),
                                      (65535, 65535), (65535, 0), (0, 65535)])
def test_field_boundaries(sem, inst):
    labels = PanopticLabels(semantic=np.array([sem], dtype=np.uint32),
                            instance=np.array([inst], dtype=np.uint32))
    back = decode_labels(encode_labels(labels))
    assert back.semantic[0] == sem
    assert back.instance[0] == inst


def test_encode_overflow():
    labels = PanopticLabels(semantic=np.array([65536], dtype=np.uint32),
                            instance=np.array([0], dtype=np.uint32))
    with pytest.raises(OverflowError):
        encode_labels(labels)
    labels = PanopticLabels(semantic=np.array([0], dtype=np.uint32),
                            instance=np.array([70000], dtype=np.uint32))
    with pytest.raises(OverflowError):
        encode_labels(labels)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 0xFFFF), st.integers(0, 0xFFFF)),
                max_size=64))
def test_label_roundtrip_property(pairs):
    sem = np.array([p[0] for p in pairs], dtype=np.uint32)
    inst = np.array([p[1] for p in pairs], dtype=np.uint32)
    labels = PanopticLabels(semantic=sem, instance=inst)
    back = decode_labels(encode_labels(labels))
    np.testing.assert_array_equal(back.semantic, sem)
    np.testing.assert_array_equal(back.instance, inst)


def test_label_file_roundtrip_bit_exact(tmp_path, rng):
    sem = rng.integers(0, 0x10000, 500).astype(np.uint32)
    inst = rng.integers(0, 0x10000, 500).astype(np.uint32)
    labels = PanopticLabels(semantic=sem, instance=inst)
    path = tmp_path / "x.label"
    write_labels(path, labels)
    back = read_labels(path)
    np.testing.assert_array_equal(back.semantic, sem)
    np.testing.assert_array_equal(back.instance, inst)
    # on-disk words are little-endian u32
    raw = path.read_bytes()
    assert len(raw) == 4 * 500
    first = struct.unpack("<I", raw[:4])[0]
    assert first == (int(inst[0]) << 16) | int(sem[0])


def test_point_cloud_roundtrip(tmp_path, rng):
    coords = rng.normal(0, 10, (321, 3)).astype(np.float32).astype(np.float64)
    intensity = rng.random(321).astype(np.float32).astype(np.float64)
    cloud = PointCloud(coords=coords, features=intensity)
    path = tmp_path / "x.bin"
    write_point_cloud(path, cloud)
    back = read_point_cloud(path)
    np.testing.assert_array_equal(back.coords, coords)
    np.testing.assert_array_equal(back.features[:, 0], intensity)
    # packed (x, y, z, intensity) little-endian float32
    raw = path.read_bytes()
    assert len(raw) == 16 * 321
    x0 = struct.unpack("<f", raw[:4])[0]
    assert x0 == np.float32(coords[0, 0])


def test_offsets_and_confidence_roundtrip(tmp_path, rng):
    off = rng.normal(0, 1, (77, 3)).astype(np.float32).astype(np.float64)
    conf = rng.random(77).astype(np.float32).astype(np.float64)
    write_offsets(tmp_path / "x.off", off)
    write_confidence(tmp_path / "x.conf", conf)
    np.testing.assert_array_equal(read_offsets(tmp_path / "x.off"), off)
    np.testing.assert_array_equal(read_confidence(tmp_path / "x.conf"), conf)
    assert (tmp_path / "x.off").stat().st_size == 12 * 77
    assert (tmp_path / "x.conf").stat().st_size == 4 * 77


@pytest.mark.parametrize("name,reader", [
    ("t.label", read_labels), ("t.bin", read_point_cloud),
    ("t.off", read_offsets), ("t.conf", read_confidence)])
def test_truncated_file_rejected(tmp_path, name, reader):
    path = tmp_path / name
    path.write_bytes(b"\x01\x02\x03")  # not a multiple of any record size
    with pytest.raises(CodecError):
        reader(path)


def test_empty_files_ok(tmp_path):
    write_labels(tmp_path / "e.label",
                 PanopticLabels(semantic=np.empty(0, np.uint32),
                                instance=np.empty(0, np.uint32)))
    assert len(read_labels(tmp_path / "e.label")) == 0
    write_offsets(tmp_path / "e.off", np.empty((0, 3)))
    assert read_offsets(tmp_path / "e.off").shape == (0, 3)
