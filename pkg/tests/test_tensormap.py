import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ocrunit.tensormap import TensorMapError, make_tensormap, read_tensormap, soup, write_tensormap


def rand_map(rng, shapes):
    return make_tensormap({k: rng.standard_normal(s).astype(np.float32) for k, s in shapes.items()})


SHAPES = {"w": (3, 4), "b": (4,), "scalar": (1,)}


def roundtrip(tmap):
    buf = io.BytesIO()
    write_tensormap(tmap, buf)
    return read_tensormap(buf.getvalue())


def test_roundtrip_preserves_names_order_and_bits(tmp_path):
    m = rand_map(np.random.default_rng(0), SHAPES)
    back = roundtrip(m)
    assert list(back) == list(m)
    for k in m:
        assert back[k].dtype == np.float32 and back[k].shape == m[k].shape
        assert back[k].tobytes() == m[k].tobytes()
    path = str(tmp_path / "m.tmap")
    write_tensormap(m, path)
    assert read_tensormap(path).keys() == m.keys()


def test_header_layout():
    buf = io.BytesIO()
    write_tensormap({"ab": np.array([1.5], dtype=np.float32)}, buf)
    data = buf.getvalue()
    assert data[:4] == b"TMAP"
    assert int.from_bytes(data[4:8], "little") == 1 and int.from_bytes(data[8:12], "little") == 1
    offset = int.from_bytes(data[-12:-4], "little")
    assert offset == len(data) - 4
    assert np.frombuffer(data[offset:], "<f4")[0] == 1.5


@pytest.mark.parametrize("data", [b"XXXX" + bytes(8), b"TMAP" + (2).to_bytes(4, "little") + bytes(4), b"TMAP\x01\x00\x00\x00\x05\x00\x00\x00"])
def test_read_rejects_bad_files(data):
    with pytest.raises(TensorMapError):
        read_tensormap(data)


def test_soup_examples():
    out = soup([{"t": np.array([0.0], np.float32)}, {"t": np.array([2.0], np.float32)}])
    assert out["t"].tolist() == [1.0]
    m = rand_map(np.random.default_rng(1), SHAPES)
    same = soup([m] * 5)
    for k in m:
        assert np.array_equal(same[k], m[k])


def test_soup_errors():
    a = {"a": np.zeros(2, np.float32)}
    with pytest.raises(TensorMapError, match=r"\['b'\]"):
        soup([a, {"a": np.zeros(2, np.float32), "b": np.zeros(1, np.float32)}])
    with pytest.raises(TensorMapError, match="'a'"):
        soup([a, {"a": np.zeros(3, np.float32)}])
    with pytest.raises(TensorMapError):
        soup([a])


@given(st.integers(0, 2**32 - 1), st.integers(2, 7))
def test_soup_permutation_invariant(seed, n):
    rng = np.random.default_rng(seed)
    maps = [rand_map(rng, SHAPES) for _ in range(n)]
    a = soup(maps)
    b = soup(list(reversed(maps)))
    for k in a:
        assert a[k].tobytes() == b[k].tobytes()


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.25, 0.5, 2.0, 4.0, -1.0]))
def test_soup_commutes_with_scaling(seed, scale):
    rng = np.random.default_rng(seed)
    maps = [rand_map(rng, SHAPES) for _ in range(3)]
    scaled = [{k: (v * np.float32(scale)).astype(np.float32) for k, v in m.items()} for m in maps]
    a = soup(scaled)
    b = soup(maps)
    for k in a:
        assert np.array_equal(a[k], (b[k] * np.float32(scale)).astype(np.float32))
