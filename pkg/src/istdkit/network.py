"""Forward pass of the prior-embedded detection network.

Stages, all inference-only:

  1. The input image is concatenated with the cp1 saliency prior and run
     through a 4-level densely nested encoder-decoder (dnim), giving
     hierarchical features f_0..f_3 with (i+1)*C channels at 1/2^i scale.
  2. Each f_i is fused with the matching cp2 prior level by an asymmetric
     pair of gates (chkim): a squeeze-style global channel gate computed
     from f_i scales the shape-adapted prior, while a pointwise bottleneck
     gate computed from the adapted prior scales f_i.
  3. The fused pyramid is mixed at full resolution and refined by channel
     and spatial attention with a residual head (agfem), ending in a
     sigmoid so the output map lives in (0, 1).

Weight tensors live in a WeightStore under the documented names (see
`parameter_shapes`). Convolutions followed by batch norm carry no bias.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, UnknownWeightError
from .priors import GdKernelBank, extract_cp1, extract_cp2
from .tensor import (
    BatchNormParams,
    ConvKernel,
    as_tensor,
    bn_infer,
    concat_channels,
    conv2d,
    pool,
    relu,
    sigmoid,
    upsample_bilinear,
)
from .weights import WeightStore


@dataclass(frozen=True)
class NetworkConfig:
    base_channels: int = 16
    r_top_down: int = 4
    r_dafwm: int = 4
    bn_eps: float = 1e-5


def dnim_nodes() -> list[tuple[int, int]]:
    """Node grid of the nested backbone: encoder column j=0, decoder j>=1."""
    return [(i, j) for j in range(4) for i in range(4 - j)]


def _node_channels(cfg: NetworkConfig, i: int, j: int) -> tuple[int, int]:
    c = cfg.base_channels
    out = (i + 1) * c
    if j == 0:
        inp = 2 if i == 0 else i * c
    else:
        inp = j * out + (i + 2) * c
    return inp, out


def _bn(store: WeightStore, prefix: str, eps: float) -> BatchNormParams:
    return BatchNormParams(
        gamma=store.get(f"{prefix}/gamma"),
        beta=store.get(f"{prefix}/beta"),
        mean=store.get(f"{prefix}/mean"),
        var=store.get(f"{prefix}/var"),
        eps=eps,
    )


def _fc(v, w) -> np.ndarray:
    vec = as_tensor(v).reshape(-1).astype(np.float64)
    out = w.astype(np.float64) @ vec
    return out.astype(np.float32).reshape(1, 1, -1)


def _double_conv(x, store: WeightStore, prefix: str, eps: float) -> np.ndarray:
    for stage in (0, 1):
        kern = ConvKernel(
            store.get(f"{prefix}/conv{stage}/w"),
            bias=store.get(f"{prefix}/conv{stage}/b"),
        )
        x = conv2d(x, kern, padding=kern.k // 2)
        x = relu(bn_infer(x, _bn(store, f"{prefix}/bn{stage}", eps)))
    return x


def dnim_forward(x, weights: WeightStore, cfg: NetworkConfig) -> list[np.ndarray]:
    """Nested encoder-decoder over the (image, cp1) pair.

    Encoder nodes n{i}_0 halve resolution via 2x2 max pooling; decoder node
    n{i}_{j} consumes all earlier nodes of its row plus the upsampled node
    below. Returns the decoder-terminal feature of each row, f_0..f_3.
    """
    x = as_tensor(x)
    if x.shape[2] != 2:
        raise ConfigurationError(f"backbone expects 2 input channels, got {x.shape[2]}")
    if x.shape[0] % 8 or x.shape[1] % 8:
        raise ConfigurationError(
            f"spatial dims must be divisible by 8, got {x.shape[:2]}"
        )
    nodes: dict[tuple[int, int], np.ndarray] = {}
    for i in range(4):
        src = x if i == 0 else pool(nodes[(i - 1, 0)], "max2")
        nodes[(i, 0)] = _double_conv(src, weights, f"dnim/n{i}_0", cfg.bn_eps)
    for j in range(1, 4):
        for i in range(4 - j):
            parts = [nodes[(i, jj)] for jj in range(j)]
            parts.append(upsample_bilinear(nodes[(i + 1, j - 1)], 2))
            nodes[(i, j)] = _double_conv(
                concat_channels(parts), weights, f"dnim/n{i}_{j}", cfg.bn_eps
            )
    return [nodes[(0, 3)], nodes[(1, 2)], nodes[(2, 1)], nodes[(3, 0)]]


def top_down_gate(y, weights: WeightStore, prefix: str,
                  cfg: NetworkConfig) -> np.ndarray:
    """Global channel gate sigmoid(BN(W2 relu(BN(W1 gap(y))))), shape 1x1xC."""
    y = as_tensor(y)
    ch = y.shape[2]
    if ch % cfg.r_top_down:
        raise ConfigurationError(
            f"{ch} channels not divisible by reduction {cfg.r_top_down}"
        )
    h = _fc(pool(y, "globalAvg"), weights.get(f"{prefix}/fc0/w"))
    h = relu(bn_infer(h, _bn(weights, f"{prefix}/bn0", cfg.bn_eps)))
    h = _fc(h, weights.get(f"{prefix}/fc1/w"))
    return sigmoid(bn_infer(h, _bn(weights, f"{prefix}/bn1", cfg.bn_eps)))


def bottom_up_gate(x, weights: WeightStore, prefix: str,
                   cfg: NetworkConfig) -> np.ndarray:
    """Pointwise gate with a C -> C/4 -> C bottleneck, same shape as x."""
    x = as_tensor(x)
    ch = x.shape[2]
    if ch < 4 or ch % 4:
        raise ConfigurationError(f"bottleneck needs channels divisible by 4, got {ch}")
    pw0 = ConvKernel(weights.get(f"{prefix}/pw0/w"), mode="pointwise")
    pw1 = ConvKernel(weights.get(f"{prefix}/pw1/w"), mode="pointwise")
    h = conv2d(x, pw0, padding=0)
    h = relu(bn_infer(h, _bn(weights, f"{prefix}/bn0", cfg.bn_eps)))
    h = conv2d(h, pw1, padding=0)
    return sigmoid(bn_infer(h, _bn(weights, f"{prefix}/bn1", cfg.bn_eps)))


def adapt_prior(cp2_i, weights: WeightStore, level: int) -> np.ndarray:
    """Shape-preserving depthwise + pointwise preprocessing of a cp2 level."""
    prefix = f"chkim/l{level}/e"
    dw = ConvKernel(weights.get(f"{prefix}/dw/w"), mode="depthwise",
                    bias=weights.get(f"{prefix}/dw/b"))
    pw = ConvKernel(weights.get(f"{prefix}/pw/w"), mode="pointwise",
                    bias=weights.get(f"{prefix}/pw/b"))
    return conv2d(conv2d(cp2_i, dw, padding=dw.k // 2), pw, padding=0)


def chkim_fuse(f_i, cp2_i, weights: WeightStore, level: int,
               cfg: NetworkConfig) -> np.ndarray:
    """Asymmetric fusion of a backbone feature with its prior level:

        k = gate_global(f) * adapted_prior + gate_pointwise(adapted_prior) * f
    """
    f_i = as_tensor(f_i)
    cp2_i = as_tensor(cp2_i)
    if f_i.shape != cp2_i.shape:
        raise ConfigurationError(
            f"feature/prior shape mismatch at level {level}: {f_i.shape} vs {cp2_i.shape}"
        )
    e = adapt_prior(cp2_i, weights, level)
    td = top_down_gate(f_i, weights, f"chkim/l{level}/td", cfg)
    bu = bottom_up_gate(e, weights, f"chkim/l{level}/bu", cfg)
    return td * e + bu * f_i


def _mlp(v, weights: WeightStore, prefix: str) -> np.ndarray:
    h = _fc(v, weights.get(f"{prefix}/fc0/w")) + weights.get(f"{prefix}/fc0/b")
    h = relu(h)
    return _fc(h, weights.get(f"{prefix}/fc1/w")) + weights.get(f"{prefix}/fc1/b")


def dual_attention(g_prime, weights: WeightStore, cfg: NetworkConfig) -> np.ndarray:
    """Channel x spatial attention weighting of the mixed feature map."""
    g_prime = as_tensor(g_prime)
    ch = g_prime.shape[2]
    if ch % cfg.r_dafwm:
        raise ConfigurationError(
            f"{ch} channels not divisible by reduction {cfg.r_dafwm}"
        )
    m_c = sigmoid(
        _mlp(pool(g_prime, "globalMax"), weights, "agfem/dafwm/mlp")
        + _mlp(pool(g_prime, "globalAvg"), weights, "agfem/dafwm/mlp")
    )
    cmax = g_prime.max(axis=2, keepdims=True)
    cavg = g_prime.mean(axis=2, dtype=np.float64).astype(np.float32)[:, :, None]
    spatial = ConvKernel(weights.get("agfem/dafwm/spatial/conv/w"),
                         bias=weights.get("agfem/dafwm/spatial/conv/b"))
    m_s = sigmoid(conv2d(concat_channels([cmax, cavg]), spatial, padding=3))
    return (m_c * m_s) * g_prime


def agfem_head(ks, weights: WeightStore, cfg: NetworkConfig) -> np.ndarray:
    """Pyramid mixing + dual attention + residual head, to a (0,1) map."""
    if len(ks) != 4:
        raise ConfigurationError("expected 4 fused pyramid levels")
    parts = [as_tensor(ks[0])]
    for i in range(1, 4):
        kern = ConvKernel(weights.get(f"agfem/pyr{i}/conv/w"),
                          bias=weights.get(f"agfem/pyr{i}/conv/b"))
        parts.append(upsample_bilinear(conv2d(ks[i], kern, padding=1), 2 ** i))
    g = concat_channels(parts)
    mix = ConvKernel(weights.get("agfem/mix/conv/w"),
                     bias=weights.get("agfem/mix/conv/b"))
    g_prime = relu(conv2d(g, mix, padding=1))
    g_f = dual_attention(g_prime, weights, cfg)
    pw0 = ConvKernel(weights.get("agfem/res/pw0/w"), mode="pointwise")
    h = bn_infer(conv2d(g, pw0, padding=0), _bn(weights, "agfem/res/bn", cfg.bn_eps))
    h = relu(h + g_f)
    pw1 = ConvKernel(weights.get("agfem/res/pw1/w"), mode="pointwise",
                     bias=weights.get("agfem/res/pw1/b"))
    return sigmoid(conv2d(h, pw1, padding=0))


def forward(image, bank: GdKernelBank, weights: WeightStore,
            cfg: NetworkConfig) -> np.ndarray:
    """Full forward pass: image -> saliency map in (0, 1), same H x W."""
    image = as_tensor(image)
    if image.shape[2] != 1:
        raise ConfigurationError("expected a single-channel image")
    cp1 = extract_cp1(image, bank)
    fs = dnim_forward(concat_channels([image, cp1]), weights, cfg)
    cp2 = extract_cp2(image, bank, weights, cfg.base_channels, cfg.bn_eps)
    ks = [chkim_fuse(fs[i], cp2[i], weights, i, cfg) for i in range(4)]
    return agfem_head(ks, weights, cfg)


def _bn_shapes(prefix: str, ch: int) -> dict[str, tuple[int, ...]]:
    return {f"{prefix}/{p}": (ch,) for p in ("gamma", "beta", "mean", "var")}


def parameter_shapes(cfg: NetworkConfig) -> dict[str, tuple[int, ...]]:
    """Every weight name the forward pass resolves, with its array shape."""
    c = cfg.base_channels
    shapes: dict[str, tuple[int, ...]] = {}

    # pke2: level 0 reads the 72 magnitude channels, deeper levels chain.
    mag = 72
    for i in range(4):
        inp = mag if i == 0 else i * c
        out = (i + 1) * c
        p = f"pke2/l{i}"
        shapes[f"{p}/dw/w"] = (3, 3, inp)
        shapes[f"{p}/dw/b"] = (inp,)
        shapes[f"{p}/pw/w"] = (1, 1, inp, out)
        shapes[f"{p}/pw/b"] = (out,)
        shapes.update(_bn_shapes(f"{p}/bn", out))

    for i, j in dnim_nodes():
        inp, out = _node_channels(cfg, i, j)
        p = f"dnim/n{i}_{j}"
        shapes[f"{p}/conv0/w"] = (3, 3, inp, out)
        shapes[f"{p}/conv0/b"] = (out,)
        shapes[f"{p}/conv1/w"] = (3, 3, out, out)
        shapes[f"{p}/conv1/b"] = (out,)
        shapes.update(_bn_shapes(f"{p}/bn0", out))
        shapes.update(_bn_shapes(f"{p}/bn1", out))

    for i in range(4):
        ch = (i + 1) * c
        p = f"chkim/l{i}"
        shapes[f"{p}/e/dw/w"] = (3, 3, ch)
        shapes[f"{p}/e/dw/b"] = (ch,)
        shapes[f"{p}/e/pw/w"] = (1, 1, ch, ch)
        shapes[f"{p}/e/pw/b"] = (ch,)
        red = ch // cfg.r_top_down
        shapes[f"{p}/td/fc0/w"] = (red, ch)
        shapes[f"{p}/td/fc1/w"] = (ch, red)
        shapes.update(_bn_shapes(f"{p}/td/bn0", red))
        shapes.update(_bn_shapes(f"{p}/td/bn1", ch))
        shapes[f"{p}/bu/pw0/w"] = (1, 1, ch, ch // 4)
        shapes[f"{p}/bu/pw1/w"] = (1, 1, ch // 4, ch)
        shapes.update(_bn_shapes(f"{p}/bu/bn0", ch // 4))
        shapes.update(_bn_shapes(f"{p}/bu/bn1", ch))

    for i in range(1, 4):
        shapes[f"agfem/pyr{i}/conv/w"] = (3, 3, (i + 1) * c, c)
        shapes[f"agfem/pyr{i}/conv/b"] = (c,)
    shapes["agfem/mix/conv/w"] = (3, 3, 4 * c, c)
    shapes["agfem/mix/conv/b"] = (c,)
    hidden = c // cfg.r_dafwm
    shapes["agfem/dafwm/mlp/fc0/w"] = (hidden, c)
    shapes["agfem/dafwm/mlp/fc0/b"] = (hidden,)
    shapes["agfem/dafwm/mlp/fc1/w"] = (c, hidden)
    shapes["agfem/dafwm/mlp/fc1/b"] = (c,)
    shapes["agfem/dafwm/spatial/conv/w"] = (7, 7, 2, 1)
    shapes["agfem/dafwm/spatial/conv/b"] = (1,)
    shapes["agfem/res/pw0/w"] = (1, 1, 4 * c, c)
    shapes.update(_bn_shapes("agfem/res/bn", c))
    shapes["agfem/res/pw1/w"] = (1, 1, c, 1)
    shapes["agfem/res/pw1/b"] = (1,)
    return shapes


def required_names(cfg: NetworkConfig) -> set[str]:
    return set(parameter_shapes(cfg))


def validate_store(weights: WeightStore, cfg: NetworkConfig) -> None:
    """Check the store holds exactly the required names (first missing one
    is reported; extras are rejected as a batch)."""
    required = required_names(cfg)
    have = set(weights.names())
    missing = sorted(required - have)
    if missing:
        from .errors import MissingWeightError

        raise MissingWeightError(missing[0])
    extra = have - required
    if extra:
        raise UnknownWeightError(extra)


def init_zero_store(cfg: NetworkConfig) -> WeightStore:
    """All-zero weights with identity batch norm (gamma=1, var=1)."""
    store = WeightStore()
    for name, shape in parameter_shapes(cfg).items():
        if name.endswith("/gamma") or name.endswith("/var"):
            store.add(name, np.ones(shape, dtype=np.float32))
        else:
            store.add(name, np.zeros(shape, dtype=np.float32))
    return store


def init_random_store(cfg: NetworkConfig, seed: int, span: float = 0.05) -> WeightStore:
    """Seeded test weights: conv/fc entries uniform(-span, span), batch-norm
    statistics mildly perturbed around identity. Not trained weights."""
    rng = np.random.default_rng(seed)
    store = WeightStore()
    for name, shape in parameter_shapes(cfg).items():
        if name.endswith("/gamma"):
            v = 1.0 + rng.uniform(-0.2, 0.2, size=shape)
        elif name.endswith("/var"):
            v = 1.0 + rng.uniform(-0.3, 0.3, size=shape)
        elif name.endswith("/mean") or name.endswith("/beta"):
            v = rng.uniform(-0.1, 0.1, size=shape)
        else:
            v = rng.uniform(-span, span, size=shape)
        store.add(name, v.astype(np.float32))
    return store
