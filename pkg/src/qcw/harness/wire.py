"""Canonical binary encoding of classical message payloads.

Payloads are dicts whose values are ints, strings, bytes, numpy integer
arrays, lists of those, or nested dicts.  Equal payloads always encode to
the same bytes, which is what transcripts and the message MAC rely on.
"""

from __future__ import annotations

import struct

import numpy as np


def encode(value) -> bytes:
    out: list[bytes] = []
    _enc(value, out)
    return b"".join(out)


def _enc(v, out: list[bytes]) -> None:
    if isinstance(v, dict):
        out.append(b"d" + struct.pack("<I", len(v)))
        for k in sorted(v):
            kb = str(k).encode()
            out.append(struct.pack("<I", len(kb)) + kb)
            _enc(v[k], out)
    elif isinstance(v, (bool, np.bool_)):
        out.append(b"i" + struct.pack("<q", int(v)))
    elif isinstance(v, (int, np.integer)):
        iv = int(v)
        if -(1 << 63) <= iv < (1 << 63):
            out.append(b"i" + struct.pack("<q", iv))
        else:
            raw = iv.to_bytes((iv.bit_length() + 8) // 8, "little", signed=True)
            out.append(b"I" + struct.pack("<I", len(raw)) + raw)
    elif isinstance(v, str):
        b = v.encode()
        out.append(b"s" + struct.pack("<I", len(b)) + b)
    elif isinstance(v, (bytes, bytearray)):
        out.append(b"b" + struct.pack("<I", len(v)) + bytes(v))
    elif isinstance(v, np.ndarray):
        if v.dtype.kind not in "biu":
            raise TypeError(f"unsupported array dtype {v.dtype}")
        a = np.ascontiguousarray(v, dtype="<i8")
        out.append(b"a" + struct.pack("<I", a.ndim) + struct.pack(f"<{a.ndim}Q", *a.shape) + a.tobytes())
    elif isinstance(v, (list, tuple)):
        if all(isinstance(x, (int, np.integer)) and not isinstance(x, bool) for x in v) and all(
                -(1 << 63) <= int(x) < (1 << 63) for x in v):
            _enc(np.asarray(v, dtype=np.int64).reshape(len(v)), out)
        else:
            out.append(b"l" + struct.pack("<I", len(v)))
            for x in v:
                _enc(x, out)
    elif v is None:
        out.append(b"n")
    else:
        raise TypeError(f"cannot encode {type(v).__name__}")


def decode(data: bytes):
    value, pos = _dec(data, 0)
    if pos != len(data):
        raise ValueError("trailing bytes after payload")
    return value


def _dec(data: bytes, pos: int):
    tag = data[pos:pos + 1]
    pos += 1
    if tag == b"d":
        (n,) = struct.unpack_from("<I", data, pos)
        pos += 4
        d = {}
        for _ in range(n):
            (kl,) = struct.unpack_from("<I", data, pos)
            pos += 4
            k = data[pos:pos + kl].decode()
            pos += kl
            d[k], pos = _dec(data, pos)
        return d, pos
    if tag == b"i":
        return struct.unpack_from("<q", data, pos)[0], pos + 8
    if tag == b"I":
        (n,) = struct.unpack_from("<I", data, pos)
        return int.from_bytes(data[pos + 4:pos + 4 + n], "little", signed=True), pos + 4 + n
    if tag in (b"s", b"b"):
        (n,) = struct.unpack_from("<I", data, pos)
        raw = data[pos + 4:pos + 4 + n]
        if len(raw) != n:
            raise ValueError("truncated payload")
        return (raw.decode() if tag == b"s" else raw), pos + 4 + n
    if tag == b"a":
        (nd,) = struct.unpack_from("<I", data, pos)
        pos += 4
        shape = struct.unpack_from(f"<{nd}Q", data, pos)
        pos += 8 * nd
        count = int(np.prod(shape)) if nd else 1
        end = pos + 8 * count
        if end > len(data):
            raise ValueError("truncated payload")
        return np.frombuffer(data[pos:end], dtype="<i8").reshape(shape).astype(np.int64), end
    if tag == b"l":
        (n,) = struct.unpack_from("<I", data, pos)
        pos += 4
        items = []
        for _ in range(n):
            x, pos = _dec(data, pos)
            items.append(x)
        return items, pos
    if tag == b"n":
        return None, pos
    raise ValueError(f"unknown payload tag {tag!r}")
