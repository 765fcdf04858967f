"""Named float32 tensors, their flat ``TMAP`` file format, and checkpoint souping.

File layout (all integers little-endian)::

    b"TMAP"  u32 version  u32 count
    count x { u32 name_len, name (UTF-8), u32 rank, rank x u64 dim, u64 offset }
    payloads: contiguous float32 LE arrays, each at its recorded absolute offset
"""
from __future__ import annotations

import struct
from collections import OrderedDict
from typing import BinaryIO, Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

MAGIC = b"TMAP"
VERSION = 1

TensorMap = Dict[str, np.ndarray]


class TensorMapError(ValueError):
    pass


def make_tensormap(items: Union[Mapping[str, object], Iterable[Tuple[str, object]]]) -> "OrderedDict[str, np.ndarray]":
    """Coerce (name, array-like) pairs into an ordered float32 TensorMap."""
    pairs = items.items() if isinstance(items, Mapping) else items
    out: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for name, value in pairs:
        if name in out:
            raise TensorMapError(f"duplicate tensor name {name!r}")
        arr = np.ascontiguousarray(value, dtype=np.float32)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        if any(d <= 0 for d in arr.shape):
            raise TensorMapError(f"tensor {name!r} has a non-positive dimension {arr.shape}")
        out[name] = arr
    return out


def write_tensormap(tmap: Mapping[str, np.ndarray], fh: Union[BinaryIO, str]) -> None:
    if isinstance(fh, str):
        with open(fh, "wb") as f:
            return write_tensormap(tmap, f)
    tmap = make_tensormap(tmap)
    names = [n.encode("utf-8") for n in tmap]
    header = 12 + sum(4 + len(n) + 4 + 8 * tmap[k].ndim + 8 for n, k in zip(names, tmap))
    offset = header
    parts = [MAGIC, struct.pack("<II", VERSION, len(tmap))]
    for raw, (name, arr) in zip(names, tmap.items()):
        parts.append(struct.pack("<I", len(raw)) + raw)
        parts.append(struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}Q", *arr.shape))
        parts.append(struct.pack("<Q", offset))
        offset += arr.size * 4
    fh.write(b"".join(parts))
    for arr in tmap.values():
        fh.write(arr.astype("<f4", copy=False).tobytes())


def _read_index(buf: memoryview) -> List[Tuple[str, Tuple[int, ...], int]]:
    if bytes(buf[:4]) != MAGIC:
        raise TensorMapError("not a TMAP file (bad magic)")
    version, count = struct.unpack_from("<II", buf, 4)
    if version != VERSION:
        raise TensorMapError(f"unsupported TMAP version {version}")
    pos = 12
    index = []
    try:
        for _ in range(count):
            (nlen,) = struct.unpack_from("<I", buf, pos)
            name = bytes(buf[pos + 4 : pos + 4 + nlen]).decode("utf-8")
            pos += 4 + nlen
            (rank,) = struct.unpack_from("<I", buf, pos)
            dims = struct.unpack_from(f"<{rank}Q", buf, pos + 4)
            pos += 4 + 8 * rank
            (offset,) = struct.unpack_from("<Q", buf, pos)
            pos += 8
            index.append((name, tuple(int(d) for d in dims), int(offset)))
    except struct.error as exc:
        raise TensorMapError(f"truncated TMAP header: {exc}") from None
    return index


def read_tensormap(source: Union[bytes, str, BinaryIO]) -> "OrderedDict[str, np.ndarray]":
    if isinstance(source, str):
        with open(source, "rb") as f:
            data = f.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
    buf = memoryview(data)
    out: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for name, shape, offset in _read_index(buf):
        count = int(np.prod(shape)) if shape else 1
        if offset + 4 * count > len(data):
            raise TensorMapError(f"payload of {name!r} runs past end of file")
        if name in out:
            raise TensorMapError(f"duplicate tensor name {name!r}")
        out[name] = np.frombuffer(data, dtype="<f4", count=count, offset=offset).reshape(shape).astype(np.float32)
    return out


def soup(checkpoints: Sequence[Mapping[str, np.ndarray]]) -> "OrderedDict[str, np.ndarray]":
    """Elementwise mean of ``n >= 2`` checkpoints with identical names and shapes.

    Accumulates in float64: for a handful of float32 inputs the sum is exact, so the
    result is within one float32 ulp of the true mean and independent of input order.
    """
    if len(checkpoints) < 2:
        raise TensorMapError("souping needs at least two checkpoints")
    first = checkpoints[0]
    names = set(first)
    for i, ck in enumerate(checkpoints[1:], start=1):
        diff = names.symmetric_difference(ck)
        if diff:
            raise TensorMapError(f"checkpoint {i} tensor names differ: {sorted(diff)}")
    out: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for name in first:
        shape = np.shape(first[name])
        acc = np.zeros(shape, dtype=np.float64)
        for i, ck in enumerate(checkpoints):
            arr = np.asarray(ck[name], dtype=np.float32)
            if arr.shape != shape:
                raise TensorMapError(f"shape mismatch for {name!r}: {shape} vs {arr.shape} in checkpoint {i}")
            acc += arr
        out[name] = (acc / len(checkpoints)).astype(np.float32)
    return out
