import numpy as np
import pytest

from istdkit.errors import ConfigurationError, MissingWeightError, UnknownWeightError
from istdkit.network import (
    NetworkConfig,
    adapt_prior,
    agfem_head,
    bottom_up_gate,
    chkim_fuse,
    dnim_forward,
    dual_attention,
    forward,
    init_random_store,
    init_zero_store,
    parameter_shapes,
    top_down_gate,
    validate_store,
)
from istdkit.priors import extract_cp1, extract_cp2
from istdkit.tensor import concat_channels
from istdkit.weights import WeightStore

from oracles import (
    bottom_up_direct,
    chkim_direct,
    dafwm_direct,
    top_down_direct,
)

CFG8 = NetworkConfig(base_channels=8)


def gate_store(ch, red, seed, prefix="g"):
    """Standalone weights for one gate block at channel width ch."""
    rng = np.random.default_rng(seed)
    store = WeightStore()
    store.add(f"{prefix}/fc0/w", rng.uniform(-0.5, 0.5, size=(red, ch)))
    store.add(f"{prefix}/fc1/w", rng.uniform(-0.5, 0.5, size=(ch, red)))
    store.add(f"{prefix}/pw0/w", rng.uniform(-0.5, 0.5, size=(1, 1, ch, ch // 4)))
    store.add(f"{prefix}/pw1/w", rng.uniform(-0.5, 0.5, size=(1, 1, ch // 4, ch)))
    for tag, n in (("bn0", red), ("bn1", ch)):
        store.add(f"{prefix}/{tag}/gamma", 1 + rng.uniform(-0.2, 0.2, size=n))
        store.add(f"{prefix}/{tag}/beta", rng.uniform(-0.1, 0.1, size=n))
        store.add(f"{prefix}/{tag}/mean", rng.uniform(-0.1, 0.1, size=n))
        store.add(f"{prefix}/{tag}/var", 1 + rng.uniform(-0.3, 0.3, size=n))
    return store


def bu_store(ch, seed, prefix="g"):
    rng = np.random.default_rng(seed)
    store = WeightStore()
    store.add(f"{prefix}/pw0/w", rng.uniform(-0.5, 0.5, size=(1, 1, ch, ch // 4)))
    store.add(f"{prefix}/pw1/w", rng.uniform(-0.5, 0.5, size=(1, 1, ch // 4, ch)))
    for tag, n in (("bn0", ch // 4), ("bn1", ch)):
        store.add(f"{prefix}/{tag}/gamma", 1 + rng.uniform(-0.2, 0.2, size=n))
        store.add(f"{prefix}/{tag}/beta", rng.uniform(-0.1, 0.1, size=n))
        store.add(f"{prefix}/{tag}/mean", rng.uniform(-0.1, 0.1, size=n))
        store.add(f"{prefix}/{tag}/var", 1 + rng.uniform(-0.3, 0.3, size=n))
    return store


def identity_bn(store, prefix, n):
    store.add(f"{prefix}/gamma", np.ones(n))
    store.add(f"{prefix}/beta", np.zeros(n))
    store.add(f"{prefix}/mean", np.zeros(n))
    store.add(f"{prefix}/var", np.ones(n))


class TestDnim:
    def test_shape_law(self, rng):
        store = init_random_store(CFG8, seed=4)
        x = rng.random((32, 32, 2), dtype=np.float32)
        fs = dnim_forward(x, store, CFG8)
        assert [f.shape for f in fs] == [
            (32, 32, 8), (16, 16, 16), (8, 8, 24), (4, 4, 32)]

    def test_zero_weights_zero_features(self, rng):
        store = init_zero_store(CFG8)
        x = rng.random((16, 16, 2), dtype=np.float32)
        for f in dnim_forward(x, store, CFG8):
            assert np.all(f == 0)

    def test_flip_equivariance_with_symmetric_kernels(self, rng):
        store = init_random_store(CFG8, seed=9)
        for name in list(store.entries):
            if "/conv" in name and name.endswith("/w"):
                w = store.entries[name]
                store.entries[name] = ((w + w[:, ::-1]) / 2).astype(np.float32)
        x = rng.random((16, 16, 2), dtype=np.float32)
        fs = dnim_forward(x, store, CFG8)
        fs_flipped = dnim_forward(x[:, ::-1], store, CFG8)
        for f, g in zip(fs, fs_flipped):
            assert np.abs(f[:, ::-1] - g).max() <= 1e-5

    def test_wrong_channel_count_rejected(self):
        store = init_zero_store(CFG8)
        with pytest.raises(ConfigurationError):
            dnim_forward(np.zeros((16, 16, 3), np.float32), store, CFG8)

    def test_indivisible_dims_rejected(self):
        store = init_zero_store(CFG8)
        with pytest.raises(ConfigurationError):
            dnim_forward(np.zeros((20, 20, 2), np.float32), store, CFG8)


class TestTopDownGate:
    def test_zero_weights_half_gate(self):
        store = WeightStore()
        store.add("g/fc0/w", np.zeros((2, 8)))
        store.add("g/fc1/w", np.zeros((8, 2)))
        identity_bn(store, "g/bn0", 2)
        identity_bn(store, "g/bn1", 8)
        gate = top_down_gate(np.random.default_rng(0).random((4, 4, 8),
                                                             dtype=np.float32),
                             store, "g", CFG8)
        assert gate.shape == (1, 1, 8)
        assert np.all(gate == np.float32(0.5))

    def test_constant_input_pool_is_exact(self, rng):
        vals = rng.uniform(-1, 1, size=8).astype(np.float32)
        y = np.broadcast_to(vals, (6, 6, 8)).astype(np.float32)
        from istdkit.tensor import pool
        assert np.array_equal(pool(y, "globalAvg").reshape(-1), vals)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_scalar_oracle(self, seed):
        rng = np.random.default_rng(seed)
        y = rng.uniform(-1, 1, size=(4, 4, 8)).astype(np.float32)
        store = gate_store(8, 2, seed)
        got = top_down_gate(y, store, "g", CFG8)
        want = top_down_direct(y, store, "g", CFG8.bn_eps)
        assert np.abs(got - want).max() <= 1e-5

    def test_open_interval(self, rng):
        store = gate_store(8, 2, 77)
        gate = top_down_gate(rng.random((4, 4, 8), dtype=np.float32),
                             store, "g", CFG8)
        assert np.all(gate > 0) and np.all(gate < 1)

    def test_indivisible_reduction_rejected(self):
        store = gate_store(8, 2, 0)
        with pytest.raises(ConfigurationError):
            top_down_gate(np.zeros((4, 4, 6), np.float32), store, "g", CFG8)


class TestBottomUpGate:
    def test_zero_weights_half_gate(self):
        store = WeightStore()
        store.add("g/pw0/w", np.zeros((1, 1, 8, 2)))
        store.add("g/pw1/w", np.zeros((1, 1, 2, 8)))
        identity_bn(store, "g/bn0", 2)
        identity_bn(store, "g/bn1", 8)
        x = np.random.default_rng(0).random((4, 4, 8), dtype=np.float32)
        gate = bottom_up_gate(x, store, "g", CFG8)
        assert gate.shape == x.shape
        assert np.all(gate == np.float32(0.5))

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_scalar_oracle(self, seed):
        rng = np.random.default_rng(seed + 100)
        x = rng.uniform(-1, 1, size=(2, 2, 4)).astype(np.float32)
        store = bu_store(4, seed)
        got = bottom_up_gate(x, store, "g", CFG8)
        want = bottom_up_direct(x, store, "g", CFG8.bn_eps)
        assert np.abs(got - want).max() <= 1e-5

    def test_small_channel_count_rejected(self):
        store = bu_store(4, 0)
        with pytest.raises(ConfigurationError):
            bottom_up_gate(np.zeros((2, 2, 2), np.float32), store, "g", CFG8)


class TestChkim:
    def test_zero_prior_path_halves_feature(self, rng):
        store = init_zero_store(CFG8)
        f = rng.uniform(-1, 1, size=(8, 8, 8)).astype(np.float32)
        cp2 = rng.uniform(size=(8, 8, 8)).astype(np.float32)
        fused = chkim_fuse(f, cp2, store, 0, CFG8)
        assert np.array_equal(fused, np.float32(0.5) * f)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_scalar_oracle(self, seed):
        rng = np.random.default_rng(seed + 7)
        store = init_random_store(CFG8, seed=seed)
        f = rng.uniform(-1, 1, size=(2, 2, 8)).astype(np.float32)
        cp2 = rng.uniform(-1, 1, size=(2, 2, 8)).astype(np.float32)
        got = chkim_fuse(f, cp2, store, 0, CFG8)
        want = chkim_direct(f, cp2, store, 0, CFG8.bn_eps)
        assert np.abs(got - want).max() <= 1e-5

    def test_fused_bound_by_gated_parts(self, rng):
        store = init_random_store(CFG8, seed=21)
        f = rng.uniform(-1, 1, size=(4, 4, 8)).astype(np.float32)
        cp2 = rng.uniform(-1, 1, size=(4, 4, 8)).astype(np.float32)
        fused = chkim_fuse(f, cp2, store, 0, CFG8)
        e = adapt_prior(cp2, store, 0)
        bound = np.abs(e) + np.abs(f) + 1e-6
        assert np.all(np.abs(fused) <= bound)

    def test_shape_mismatch_rejected(self, rng):
        store = init_random_store(CFG8, seed=2)
        with pytest.raises(ConfigurationError):
            chkim_fuse(np.zeros((4, 4, 8), np.float32),
                       np.zeros((4, 4, 16), np.float32), store, 0, CFG8)


class TestAgfem:
    def _pyramid(self, rng, c=8, size=16):
        return [rng.uniform(-1, 1, size=(size // 2 ** i, size // 2 ** i,
                                         (i + 1) * c)).astype(np.float32)
                for i in range(4)]

    def test_output_shape_and_range(self, rng):
        store = init_random_store(CFG8, seed=3)
        out = agfem_head(self._pyramid(rng), store, CFG8)
        assert out.shape == (16, 16, 1)
        assert np.all(out > 0) and np.all(out < 1)

    def test_zero_weights_constant_half(self, rng):
        store = init_zero_store(CFG8)
        out = agfem_head(self._pyramid(rng), store, CFG8)
        assert np.all(out == np.float32(0.5))

    @pytest.mark.parametrize("seed", range(5))
    def test_dual_attention_matches_scalar_oracle(self, seed):
        rng = np.random.default_rng(seed + 40)
        store = init_random_store(CFG8, seed=seed)
        g_prime = rng.uniform(0, 1, size=(4, 4, 8)).astype(np.float32)
        got = dual_attention(g_prime, store, CFG8)
        want = dafwm_direct(g_prime, store, CFG8.bn_eps)
        assert np.abs(got - want).max() <= 1e-5

    def test_dual_attention_identical_channels(self, rng):
        # with all channels equal, the channel-max and channel-avg planes
        # coincide, so the spatial gate sees a duplicated plane
        store = init_random_store(CFG8, seed=15)
        plane = rng.uniform(0, 1, size=(4, 4, 1)).astype(np.float32)
        g_prime = np.repeat(plane, 8, axis=2)
        got = dual_attention(g_prime, store, CFG8)
        want = dafwm_direct(g_prime, store, CFG8.bn_eps)
        assert np.abs(got - want).max() <= 1e-5


class TestForward:
    def test_shapes_range_and_purity(self, bank, rng):
        store = init_random_store(CFG8, seed=19)
        img = rng.random((32, 32, 1), dtype=np.float32)
        out1 = forward(img, bank, store, CFG8)
        out2 = forward(img, bank, store, CFG8)
        assert out1.shape == (32, 32, 1)
        assert np.all(out1 > 0) and np.all(out1 < 1)
        assert np.array_equal(out1, out2)

    def test_zero_weights_exactly_half(self, bank, rng):
        store = init_zero_store(CFG8)
        img = rng.random((16, 16, 1), dtype=np.float32)
        out = forward(img, bank, store, CFG8)
        assert np.all(out == np.float32(0.5))

    def test_zero_image_zero_prior_path(self, bank):
        store = init_zero_store(CFG8)
        img = np.zeros((16, 16, 1), np.float32)
        assert np.all(extract_cp1(img, bank) == 0)
        out = forward(img, bank, store, CFG8)
        assert np.all(out == np.float32(0.5))

    def test_matches_manual_composition(self, bank, rng):
        store = init_random_store(CFG8, seed=6)
        img = rng.random((16, 16, 1), dtype=np.float32)
        cp1 = extract_cp1(img, bank)
        fs = dnim_forward(concat_channels([img, cp1]), store, CFG8)
        cp2 = extract_cp2(img, bank, store, 8)
        ks = [chkim_fuse(fs[i], cp2[i], store, i, CFG8) for i in range(4)]
        assert np.array_equal(forward(img, bank, store, CFG8),
                              agfem_head(ks, store, CFG8))


class TestStoreValidation:
    def test_complete_store_accepted(self):
        validate_store(init_zero_store(CFG8), CFG8)

    def test_missing_name_reported(self):
        store = init_zero_store(CFG8)
        del store.entries["agfem/mix/conv/w"]
        with pytest.raises(MissingWeightError, match="agfem/mix/conv/w"):
            validate_store(store, CFG8)

    def test_unknown_name_rejected(self):
        store = init_zero_store(CFG8)
        store.add("rogue/w", np.zeros(3))
        with pytest.raises(UnknownWeightError, match="rogue/w"):
            validate_store(store, CFG8)

    def test_shapes_cover_both_widths(self):
        for c in (8, 16):
            shapes = parameter_shapes(NetworkConfig(base_channels=c))
            assert shapes["pke2/l0/pw/w"] == (1, 1, 72, c)
            assert shapes["dnim/n0_3/conv0/w"] == (3, 3, 3 * c + 2 * c, c)
            assert shapes["agfem/res/pw1/w"] == (1, 1, c, 1)
