"""Named-tensor container and its bit-exact binary file format.

File layout (all integers little-endian, independent of host byte order):

    magic   4 bytes  b"CSPW"
    version u32      1
    count   u32      number of entries
    entry   repeated count times:
        name_len u16
        name     name_len bytes of UTF-8
        rank     u8
        dims     rank * u32
        dtype    u8   (0 = float32 little-endian)
        payload  prod(dims) * 4 bytes

Entries keep their order through save/load round trips, so a loaded file
re-saves byte-identically.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagicError,
    BadVersionError,
    DuplicateNameError,
    MissingWeightError,
    TruncatedFileError,
    WeightsError,
)

MAGIC = b"CSPW"
VERSION = 1
DTYPE_F32 = 0


@dataclass
class WeightStore:
    """Ordered mapping from hierarchical names to float32 arrays."""

    entries: dict[str, np.ndarray] = field(default_factory=dict)

    def add(self, name: str, value) -> None:
        if name in self.entries:
            raise DuplicateNameError(name)
        self.entries[name] = np.ascontiguousarray(value, dtype=np.float32)

    def get(self, name: str) -> np.ndarray:
        try:
            return self.entries[name]
        except KeyError:
            raise MissingWeightError(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def names(self):
        return list(self.entries)


def save_weights(store: WeightStore, path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(store.entries)))
        for name, value in store.entries.items():
            raw = name.encode("utf-8")
            if len(raw) > 0xFFFF:
                raise WeightsError(f"name too long: {name[:40]}...")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<B", value.ndim))
            fh.write(struct.pack(f"<{value.ndim}I", *value.shape))
            fh.write(struct.pack("<B", DTYPE_F32))
            fh.write(value.astype("<f4").tobytes())


def _take(buf: bytes, offset: int, n: int) -> tuple[bytes, int]:
    if offset + n > len(buf):
        raise TruncatedFileError(f"file ends {offset + n - len(buf)} bytes early")
    return buf[offset:offset + n], offset + n


def load_weights(path) -> WeightStore:
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, off = _take(buf, 0, 4)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    head, off = _take(buf, off, 8)
    version, count = struct.unpack("<II", head)
    if version != VERSION:
        raise BadVersionError(f"unsupported version {version}, expected {VERSION}")
    store = WeightStore()
    for _ in range(count):
        raw, off = _take(buf, off, 2)
        (name_len,) = struct.unpack("<H", raw)
        raw, off = _take(buf, off, name_len)
        name = raw.decode("utf-8")
        raw, off = _take(buf, off, 1)
        rank = raw[0]
        raw, off = _take(buf, off, 4 * rank)
        dims = struct.unpack(f"<{rank}I", raw)
        raw, off = _take(buf, off, 1)
        if raw[0] != DTYPE_F32:
            raise WeightsError(f"unknown dtype code {raw[0]} for {name}")
        n = 1
        for d in dims:
            n *= d
        raw, off = _take(buf, off, 4 * n)
        value = np.frombuffer(raw, dtype="<f4").reshape(dims).astype(np.float32)
        store.add(name, value)
    if off != len(buf):
        raise WeightsError(f"{len(buf) - off} trailing bytes after last entry")
    return store
