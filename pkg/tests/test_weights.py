import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from istdkit.errors import (
    BadMagicError,
    BadVersionError,
    DuplicateNameError,
    MissingWeightError,
    TruncatedFileError,
    WeightsError,
)
from istdkit.weights import MAGIC, WeightStore, load_weights, save_weights

name_st = st.text(
    alphabet=st.sampled_from("abcdefgh0123_/"), min_size=1, max_size=24)
shape_st = st.lists(st.integers(1, 5), min_size=0, max_size=3)


def make_store(entries):
    store = WeightStore()
    rng = np.random.default_rng(0)
    for name, shape in entries.items():
        store.add(name, rng.uniform(-1, 1, size=tuple(shape)).astype(np.float32))
    return store


class TestRoundTrip:
    def test_save_load_save_byte_identical(self, tmp_path):
        store = make_store({"a/w": [2, 3], "a/b": [3], "z": []})
        p1, p2 = tmp_path / "a.w", tmp_path / "b.w"
        save_weights(store, p1)
        save_weights(load_weights(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    @settings(max_examples=40, deadline=None)
    @given(entries=st.dictionaries(name_st, shape_st, min_size=0, max_size=6))
    def test_values_and_order_preserved(self, entries, tmp_path_factory):
        path = tmp_path_factory.mktemp("w") / "s.w"
        store = make_store(entries)
        save_weights(store, path)
        loaded = load_weights(path)
        assert loaded.names() == store.names()
        for name in store.names():
            assert np.array_equal(loaded.get(name), store.get(name))
            assert loaded.get(name).dtype == np.float32

    def test_file_is_little_endian_fixed_layout(self, tmp_path):
        store = WeightStore()
        store.add("x", np.array([1.0, 2.0], dtype=np.float32))
        path = tmp_path / "x.w"
        save_weights(store, path)
        raw = path.read_bytes()
        assert raw[:4] == MAGIC == b"CSPW"
        version, count = struct.unpack("<II", raw[4:12])
        assert (version, count) == (1, 1)
        name_len = struct.unpack("<H", raw[12:14])[0]
        assert raw[14:15] == b"x" and name_len == 1
        rank = raw[15]
        dims = struct.unpack("<I", raw[16:20])[0]
        dtype = raw[20]
        assert (rank, dims, dtype) == (1, 2, 0)
        assert raw[21:29] == struct.pack("<ff", 1.0, 2.0)
        assert len(raw) == 29


class TestErrors:
    def _bytes(self, tmp_path):
        store = make_store({"a": [2], "b": [1, 2]})
        path = tmp_path / "ok.w"
        save_weights(store, path)
        return path.read_bytes()

    def test_bad_magic(self, tmp_path):
        raw = self._bytes(tmp_path)
        bad = tmp_path / "bad.w"
        bad.write_bytes(b"NOPE" + raw[4:])
        with pytest.raises(BadMagicError):
            load_weights(bad)

    def test_bad_version(self, tmp_path):
        raw = self._bytes(tmp_path)
        bad = tmp_path / "bad.w"
        bad.write_bytes(raw[:4] + struct.pack("<I", 9) + raw[8:])
        with pytest.raises(BadVersionError):
            load_weights(bad)

    @pytest.mark.parametrize("cut", [1, 3, 10])
    def test_truncation(self, tmp_path, cut):
        raw = self._bytes(tmp_path)
        bad = tmp_path / "bad.w"
        bad.write_bytes(raw[:-cut])
        with pytest.raises(TruncatedFileError):
            load_weights(bad)

    def test_trailing_garbage(self, tmp_path):
        raw = self._bytes(tmp_path)
        bad = tmp_path / "bad.w"
        bad.write_bytes(raw + b"\x00\x01")
        with pytest.raises(WeightsError):
            load_weights(bad)

    def test_duplicate_name_rejected(self):
        store = WeightStore()
        store.add("a", np.zeros(1, np.float32))
        with pytest.raises(DuplicateNameError):
            store.add("a", np.zeros(2, np.float32))

    def test_missing_name_reported(self):
        store = WeightStore()
        with pytest.raises(MissingWeightError, match="ghost"):
            store.get("ghost")
