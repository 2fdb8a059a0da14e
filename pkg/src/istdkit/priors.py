"""Surround-convergent prior extraction.

A frozen bank of first-derivative-of-Gaussian kernels at 3 scales x 24
orientations turns an input image into squared orthogonal-pair gradient
responses. From those the two priors are derived: cp1, a single-channel
saliency map normalized to [0, 1], and cp2, a four-level feature pyramid
computed by a small learned depthwise-separable stack.

Orientation o covers o * 15 degrees. The orientation table stores exact
antipodes (cos/sin of o >= 12 are the negated values of o - 12), so the
squared response at theta is bitwise equal to the response at theta + 180.
The derivative filters use reflect padding: a gradient filter must respond
zero on a constant image all the way to the border, which zero padding
violates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .tensor import (
    ConvKernel,
    BatchNormParams,
    as_tensor,
    bn_infer,
    concat_channels,
    conv2d,
    pool,
    relu,
)
from .weights import WeightStore

SCALE_SIZES = (3, 5, 7)
ORIENTATIONS = 24
MAGNITUDE_CHANNELS = ORIENTATIONS * len(SCALE_SIZES)


def default_sigmas(sizes=SCALE_SIZES) -> tuple[float, ...]:
    """Per-scale Gaussian sigma (k - 1) / 4, so +-2 sigma fits the support."""
    return tuple((k - 1) / 4.0 for k in sizes)


def _deriv_grid(k: int, sigma: float, cos_t: float, sin_t: float) -> np.ndarray:
    half = (k - 1) // 2
    y, x = np.mgrid[-half:half + 1, -half:half + 1].astype(np.float64)
    g = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma)) / math.sqrt(
        2.0 * math.pi * sigma * sigma
    )
    return -(g / (sigma * sigma)) * (x * cos_t + y * sin_t)


@dataclass(frozen=True)
class GdKernel:
    """One oriented derivative-of-Gaussian plane."""

    k: int
    sigma: float
    theta: float
    grid: np.ndarray


def build_gd_kernel(k: int, sigma: float, theta: float) -> GdKernel:
    if k < 3 or k % 2 == 0:
        raise ConfigurationError(f"kernel side must be odd and >= 3, got {k}")
    if sigma <= 0:
        raise ConfigurationError(f"sigma must be positive, got {sigma}")
    grid = _deriv_grid(k, sigma, math.cos(theta), math.sin(theta)).astype(np.float32)
    grid.setflags(write=False)
    return GdKernel(k=k, sigma=sigma, theta=theta, grid=grid)


def _orientation_table(n: int) -> list[tuple[float, float]]:
    if n % 4 != 0:
        raise ConfigurationError("orientation count must be divisible by 4")
    table: list[tuple[float, float]] = [(0.0, 0.0)] * n
    for o in range(n // 2):
        c, s = math.cos(o * 2.0 * math.pi / n), math.sin(o * 2.0 * math.pi / n)
        table[o] = (c, s)
        table[o + n // 2] = (-c, -s)
    return table


@dataclass(frozen=True)
class GdKernelBank:
    """Frozen 3-scale x 24-orientation kernel set plus the 90-degree partners.

    `primary[s]` stacks the 24 orientation grids of scale s as (24, k, k);
    `partner[s][o]` is the kernel at orientation o + 90 degrees, shared
    bitwise with `primary[s][(o + 6) % 24]`.
    """

    sizes: tuple[int, ...]
    sigmas: tuple[float, ...]
    orientations: int
    primary: tuple[np.ndarray, ...]
    partner: tuple[np.ndarray, ...]

    def kernel(self, scale_index: int, orientation_index: int) -> GdKernel:
        grid = self.primary[scale_index][orientation_index]
        return GdKernel(
            k=self.sizes[scale_index],
            sigma=self.sigmas[scale_index],
            theta=orientation_index * 2.0 * math.pi / self.orientations,
            grid=grid,
        )


def build_kernel_bank(sizes=SCALE_SIZES, orientations: int = ORIENTATIONS,
                      sigmas=None) -> GdKernelBank:
    if sigmas is None:
        sigmas = default_sigmas(sizes)
    sigmas = tuple(float(s) for s in sigmas)
    if len(sigmas) != len(sizes):
        raise ConfigurationError("need one sigma per scale")
    table = _orientation_table(orientations)
    quarter = orientations // 4
    primary = []
    partner = []
    for k, sigma in zip(sizes, sigmas):
        grids = np.stack(
            [_deriv_grid(k, sigma, c, s) for c, s in table]
        ).astype(np.float32)
        grids.setflags(write=False)
        partner_view = grids[(np.arange(orientations) + quarter) % orientations]
        partner_view.setflags(write=False)
        primary.append(grids)
        partner.append(partner_view)
    return GdKernelBank(
        sizes=tuple(sizes),
        sigmas=sigmas,
        orientations=orientations,
        primary=tuple(primary),
        partner=tuple(partner),
    )


def gradient_magnitude(image, bank: GdKernelBank, scale_index: int) -> np.ndarray:
    """Squared orthogonal-pair gradient responses, one channel per orientation.

    Channel o holds (d_theta_o * I)^2 + (d_theta_o+90 * I)^2, computed as two
    depthwise convolutions over a 24-channel replication of the image.
    """
    image = as_tensor(image)
    if image.shape[2] != 1:
        raise ConfigurationError(
            f"gradient magnitude expects a single-channel image, got {image.shape[2]}"
        )
    k = bank.sizes[scale_index]
    rep = np.repeat(image, bank.orientations, axis=2)
    kp = ConvKernel(np.moveaxis(bank.primary[scale_index], 0, 2), mode="depthwise")
    kq = ConvKernel(np.moveaxis(bank.partner[scale_index], 0, 2), mode="depthwise")
    a = conv2d(rep, kp, padding=k // 2, border="reflect")
    b = conv2d(rep, kq, padding=k // 2, border="reflect")
    return a * a + b * b


def _magnitude_stack(image, bank: GdKernelBank) -> np.ndarray:
    return concat_channels(
        [gradient_magnitude(image, bank, s) for s in range(len(bank.sizes))]
    )


def minmax_normalize(x) -> np.ndarray:
    """Rescale to [0, 1]; a constant field maps to all-zero."""
    x = as_tensor(x)
    lo = x.min()
    hi = x.max()
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def extract_cp1(image, bank: GdKernelBank) -> np.ndarray:
    """Saliency prior: frozen uniform mean over all 72 magnitude channels,
    then per-image min-max normalization to [0, 1]."""
    stack = _magnitude_stack(image, bank)
    n = stack.shape[2]
    mean_kernel = ConvKernel(
        np.full((1, 1, n, 1), 1.0 / n, dtype=np.float32), mode="pointwise"
    )
    return minmax_normalize(conv2d(stack, mean_kernel, padding=0))


def _load_bn(store: WeightStore, prefix: str, eps: float) -> BatchNormParams:
    return BatchNormParams(
        gamma=store.get(f"{prefix}/gamma"),
        beta=store.get(f"{prefix}/beta"),
        mean=store.get(f"{prefix}/mean"),
        var=store.get(f"{prefix}/var"),
        eps=eps,
    )


def _separable_block(x, store: WeightStore, prefix: str, eps: float) -> np.ndarray:
    dw = ConvKernel(store.get(f"{prefix}/dw/w"), mode="depthwise",
                    bias=store.get(f"{prefix}/dw/b"))
    pw = ConvKernel(store.get(f"{prefix}/pw/w"), mode="pointwise",
                    bias=store.get(f"{prefix}/pw/b"))
    x = conv2d(x, dw, padding=dw.k // 2)
    x = conv2d(x, pw, padding=0)
    return relu(bn_infer(x, _load_bn(store, f"{prefix}/bn", eps)))


def extract_cp2(image, bank: GdKernelBank, weights: WeightStore,
                base_channels: int, bn_eps: float = 1e-5) -> list[np.ndarray]:
    """Structural prior pyramid: level i has shape (H/2^i, W/2^i, (i+1)C)."""
    image = as_tensor(image)
    if image.shape[0] % 8 or image.shape[1] % 8:
        raise ConfigurationError(
            f"spatial dims must be divisible by 8, got {image.shape[:2]}"
        )
    stack = _magnitude_stack(image, bank)
    levels = [_separable_block(stack, weights, "pke2/l0", bn_eps)]
    for i in range(1, 4):
        x = pool(levels[-1], "max2")
        levels.append(_separable_block(x, weights, f"pke2/l{i}", bn_eps))
    return levels


def bank_to_store(bank: GdKernelBank) -> WeightStore:
    store = WeightStore()
    for s in range(len(bank.sizes)):
        for o in range(bank.orientations):
            store.add(f"gdbank/s{s}/o{o}", bank.primary[s][o])
            store.add(f"gdbank/s{s}/o{o}/partner", bank.partner[s][o])
    return store


def bank_from_store(store: WeightStore, sizes=SCALE_SIZES,
                    orientations: int = ORIENTATIONS, sigmas=None) -> GdKernelBank:
    if sigmas is None:
        sigmas = default_sigmas(sizes)
    primary = []
    partner = []
    for s, k in enumerate(sizes):
        grids = np.stack(
            [store.get(f"gdbank/s{s}/o{o}") for o in range(orientations)]
        ).astype(np.float32)
        partners = np.stack(
            [store.get(f"gdbank/s{s}/o{o}/partner") for o in range(orientations)]
        ).astype(np.float32)
        if grids.shape[1:] != (k, k):
            raise ConfigurationError(
                f"bank scale {s} grids have shape {grids.shape[1:]}, expected {(k, k)}"
            )
        grids.setflags(write=False)
        partners.setflags(write=False)
        primary.append(grids)
        partner.append(partners)
    return GdKernelBank(
        sizes=tuple(sizes),
        sigmas=tuple(float(x) for x in sigmas),
        orientations=orientations,
        primary=tuple(primary),
        partner=tuple(partner),
    )
