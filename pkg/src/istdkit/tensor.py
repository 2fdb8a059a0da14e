"""Dense channel-last tensor primitives.

Every feature map in the pipeline is a float32 numpy array of shape
(height, width, channels). All operations here are pure functions: inputs
are never mutated and identical inputs give bitwise-identical outputs.
Convolution and averaging reductions accumulate in float64 before casting
back to float32; border handling defaults to zero padding, with reflect
padding available for the prior-extraction filters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

GENERAL = "general"
DEPTHWISE = "depthwise"
POINTWISE = "pointwise"

_BORDER_MODES = {"zero": "constant", "reflect": "reflect"}


def as_tensor(a) -> np.ndarray:
    """Coerce to a (H, W, C) float32 array; 2-D input gets a channel axis."""
    a = np.asarray(a, dtype=np.float32)
    if a.ndim == 2:
        a = a[:, :, None]
    if a.ndim != 3:
        raise ConfigurationError(f"expected 2-D or 3-D array, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class ConvKernel:
    """Convolution weights.

    Weight layout is (k, k, in_channels, out_channels) for general and
    pointwise kernels, and (k, k, channels) for depthwise kernels. Bias,
    when present, has one entry per output channel.
    """

    weights: np.ndarray
    mode: str = GENERAL
    bias: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float32)
        object.__setattr__(self, "weights", w)
        if self.mode not in (GENERAL, DEPTHWISE, POINTWISE):
            raise ConfigurationError(f"unknown kernel mode {self.mode!r}")
        expected_ndim = 3 if self.mode == DEPTHWISE else 4
        if w.ndim != expected_ndim:
            raise ConfigurationError(
                f"{self.mode} kernel needs {expected_ndim}-D weights, got shape {w.shape}"
            )
        if w.shape[0] != w.shape[1]:
            raise ConfigurationError(f"kernel must be square, got shape {w.shape}")
        if w.shape[0] % 2 == 0:
            raise ConfigurationError(f"kernel side must be odd, got {w.shape[0]}")
        if self.mode == POINTWISE and w.shape[0] != 1:
            raise ConfigurationError("pointwise kernel must be 1x1")
        if self.bias is not None:
            b = np.asarray(self.bias, dtype=np.float32)
            object.__setattr__(self, "bias", b)
            if b.shape != (self.out_channels,):
                raise ConfigurationError(
                    f"bias length {b.shape} does not match {self.out_channels} output channels"
                )

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[2]

    @property
    def out_channels(self) -> int:
        return self.weights.shape[2] if self.mode == DEPTHWISE else self.weights.shape[3]


@dataclass(frozen=True)
class BatchNormParams:
    """Inference-mode batch normalization parameters (per channel)."""

    gamma: np.ndarray
    beta: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    eps: float = 1e-5

    def __post_init__(self):
        for field in ("gamma", "beta", "mean", "var"):
            v = np.asarray(getattr(self, field), dtype=np.float32).reshape(-1)
            object.__setattr__(self, field, v)
        n = self.gamma.shape[0]
        if not (self.beta.shape[0] == self.mean.shape[0] == self.var.shape[0] == n):
            raise ConfigurationError("batch-norm parameter arrays must share length")
        if np.any(self.var < 0):
            raise ConfigurationError("running variance must be non-negative")
        if self.eps < 0:
            raise ConfigurationError("eps must be non-negative")


def conv2d(x, kernel: ConvKernel, padding: int, border: str = "zero") -> np.ndarray:
    """Stride-1 sliding-window cross-correlation.

    `padding` pixels are added on each spatial side before the sweep; the
    caller picks k//2 for same-size output. Accumulates in float64.
    """
    x = as_tensor(x)
    if border not in _BORDER_MODES:
        raise ConfigurationError(f"unknown border mode {border!r}")
    if padding < 0:
        raise ConfigurationError("padding must be >= 0")
    channels = x.shape[2]
    if kernel.in_channels != channels:
        raise ConfigurationError(
            f"kernel expects {kernel.in_channels} input channels, tensor has {channels}"
        )
    k = kernel.k
    h_out = x.shape[0] + 2 * padding - k + 1
    w_out = x.shape[1] + 2 * padding - k + 1
    if h_out < 1 or w_out < 1:
        raise ConfigurationError("kernel larger than padded input")

    xp = x.astype(np.float64)
    if padding:
        xp = np.pad(xp, ((padding, padding), (padding, padding), (0, 0)),
                    mode=_BORDER_MODES[border])
    w64 = kernel.weights.astype(np.float64)
    out_ch = kernel.out_channels
    acc = np.zeros((h_out, w_out, out_ch), dtype=np.float64)
    for dy in range(k):
        for dx in range(k):
            win = xp[dy:dy + h_out, dx:dx + w_out]
            if kernel.mode == DEPTHWISE:
                acc += win * w64[dy, dx]
            else:
                acc += win @ w64[dy, dx]
    if kernel.bias is not None:
        acc += kernel.bias.astype(np.float64)
    return acc.astype(np.float32)


def pool(x, kind: str) -> np.ndarray:
    """2x2 stride-2 pooling (max2/avg2) or global pooling to 1x1xC."""
    x = as_tensor(x)
    h, w, c = x.shape
    if kind in ("max2", "avg2"):
        if h % 2 or w % 2:
            raise ConfigurationError(f"2x pooling needs even spatial dims, got {h}x{w}")
        blocks = x.reshape(h // 2, 2, w // 2, 2, c)
        if kind == "max2":
            return blocks.max(axis=(1, 3))
        return blocks.mean(axis=(1, 3), dtype=np.float64).astype(np.float32)
    if kind == "globalAvg":
        return x.mean(axis=(0, 1), dtype=np.float64).astype(np.float32).reshape(1, 1, c)
    if kind == "globalMax":
        return x.max(axis=(0, 1)).reshape(1, 1, c)
    raise ConfigurationError(f"unknown pooling kind {kind!r}")


def _axis_samples(n_in: int, factor: int):
    # Sample centers at (i + 0.5)/factor - 0.5, clamped to the valid range.
    s = (np.arange(n_in * factor, dtype=np.float64) + 0.5) / factor - 0.5
    s = np.clip(s, 0.0, n_in - 1)
    lo = np.floor(s).astype(np.int64)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = s - lo
    return lo, hi, frac


def upsample_bilinear(x, factor: int) -> np.ndarray:
    """Bilinear upsampling by 2, 4, or 8 (half-pixel-center convention)."""
    if factor not in (2, 4, 8):
        raise ConfigurationError(f"upsampling factor must be 2, 4, or 8, got {factor}")
    x = as_tensor(x).astype(np.float64)
    h, w, _ = x.shape
    lo, hi, fr = _axis_samples(h, factor)
    rows = x[lo] * (1.0 - fr)[:, None, None] + x[hi] * fr[:, None, None]
    lo, hi, fr = _axis_samples(w, factor)
    out = rows[:, lo] * (1.0 - fr)[None, :, None] + rows[:, hi] * fr[None, :, None]
    return out.astype(np.float32)


def bn_infer(x, p: BatchNormParams) -> np.ndarray:
    """Per-channel y = gamma * (x - mean) / sqrt(var + eps) + beta."""
    x = as_tensor(x)
    if p.gamma.shape[0] != x.shape[2]:
        raise ConfigurationError(
            f"batch-norm params cover {p.gamma.shape[0]} channels, tensor has {x.shape[2]}"
        )
    scale = p.gamma / np.sqrt(p.var + np.float32(p.eps))
    return scale * (x - p.mean) + p.beta


def relu(x) -> np.ndarray:
    return np.maximum(as_tensor(x), np.float32(0.0))


def sigmoid(x) -> np.ndarray:
    x = as_tensor(x)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def activate(x, kind: str) -> np.ndarray:
    if kind == "relu":
        return relu(x)
    if kind == "sigmoid":
        return sigmoid(x)
    raise ConfigurationError(f"unknown activation {kind!r}")


def concat_channels(parts) -> np.ndarray:
    parts = [as_tensor(p) for p in parts]
    if not parts:
        raise ConfigurationError("cannot concatenate zero tensors")
    shape = parts[0].shape[:2]
    for p in parts[1:]:
        if p.shape[:2] != shape:
            raise ConfigurationError(
                f"spatial mismatch in concat: {p.shape[:2]} vs {shape}"
            )
    return np.concatenate(parts, axis=2)
