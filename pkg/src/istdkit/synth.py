"""Seeded synthetic infrared scenes with exact ground truth.

Scenes are built in float64 as base + linear ramp + clutter blobs + target
blobs + Gaussian noise, clamped to [0, 1] and stored as float32. Targets
are isotropic Gaussian profiles; the ground-truth mask is the exact
half-amplitude level set of each target (computed noise-free), so a target
with spread sigma covers a disk of radius sigma * sqrt(2 ln 2).

All randomness comes from numpy's PCG64 generator seeded per scene, which
makes every scene bitwise reproducible from its spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class TargetSpec:
    row: float
    col: float
    amplitude: float
    sigma: float
    sigma_col: float | None = None  # anisotropic profile when set

    def sigmas(self) -> tuple[float, float]:
        return (self.sigma, self.sigma_col if self.sigma_col is not None else self.sigma)


@dataclass(frozen=True)
class ClutterSpec:
    count: int
    amplitude: tuple[float, float]
    sigma: tuple[float, float]


@dataclass(frozen=True)
class BackgroundSpec:
    base: float = 0.2
    ramp: tuple[float, float] = (0.0, 0.0)  # full-span deltas along rows, cols


@dataclass(frozen=True)
class SceneSpec:
    height: int
    width: int
    targets: tuple[TargetSpec, ...] = ()
    background: BackgroundSpec = field(default_factory=BackgroundSpec)
    clutter: tuple[ClutterSpec, ...] = ()  # independent blob populations
    noise_sigma: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class LabeledScene:
    image: np.ndarray  # (H, W, 1) float32 in [0, 1]
    mask: np.ndarray  # (H, W) bool
    spec: SceneSpec

    @property
    def snr(self) -> float:
        """Weakest target amplitude over noise sigma (inf when noise-free)."""
        if not self.spec.targets:
            return math.inf
        amp = min(t.amplitude for t in self.spec.targets)
        return amp / self.spec.noise_sigma if self.spec.noise_sigma > 0 else math.inf


def _blob(h: int, w: int, row: float, col: float, amplitude: float,
          sigma_r: float, sigma_c: float) -> np.ndarray:
    y = np.arange(h, dtype=np.float64)[:, None] - row
    x = np.arange(w, dtype=np.float64)[None, :] - col
    return amplitude * np.exp(
        -(y * y) / (2.0 * sigma_r * sigma_r) - (x * x) / (2.0 * sigma_c * sigma_c)
    )


def render_scene(spec: SceneSpec) -> LabeledScene:
    h, w = spec.height, spec.width
    for t in spec.targets:
        if not (0 <= t.row <= h - 1 and 0 <= t.col <= w - 1):
            raise ConfigurationError(
                f"target center ({t.row}, {t.col}) outside {h}x{w} image"
            )
    rng = np.random.default_rng(spec.seed)

    rows = np.arange(h, dtype=np.float64)[:, None]
    cols = np.arange(w, dtype=np.float64)[None, :]
    dr, dc = spec.background.ramp
    field64 = np.full((h, w), spec.background.base, dtype=np.float64)
    if dr:
        field64 += dr * (rows / max(h - 1, 1) - 0.5)
    if dc:
        field64 += dc * (cols / max(w - 1, 1) - 0.5)

    for population in spec.clutter:
        lo_a, hi_a = population.amplitude
        lo_s, hi_s = population.sigma
        for _ in range(population.count):
            crow = rng.uniform(0, h - 1)
            ccol = rng.uniform(0, w - 1)
            amp = rng.uniform(lo_a, hi_a)
            sig = rng.uniform(lo_s, hi_s)
            field64 += _blob(h, w, crow, ccol, amp, sig, sig)

    mask = np.zeros((h, w), dtype=bool)
    for t in spec.targets:
        sr, sc = t.sigmas()
        profile = _blob(h, w, t.row, t.col, t.amplitude, sr, sc)
        field64 += profile
        mask |= profile >= t.amplitude / 2.0

    if spec.noise_sigma > 0:
        field64 = field64 + rng.normal(0.0, spec.noise_sigma, size=(h, w))

    image = np.clip(field64, 0.0, 1.0).astype(np.float32)[:, :, None]
    return LabeledScene(image=image, mask=mask, spec=spec)


def _separated_centers(rng, n, h, w, margin, min_dist):
    centers: list[tuple[float, float]] = []
    while len(centers) < n:
        r = rng.uniform(margin, h - 1 - margin)
        c = rng.uniform(margin, w - 1 - margin)
        if all(math.hypot(r - rr, c - cc) >= min_dist for rr, cc in centers):
            centers.append((r, c))
    return centers


def make_suite(kind: str, n: int, seed: int) -> list[LabeledScene]:
    """Deterministic scene families for the verification harness.

    localization: 128x128, one off-center target (amplitude 0.5-0.85, sigma
        1.2-1.8), SNR drawn in [4, 10], mild ramp, plus two clutter
        populations: broad thermal structures (sigma 6-12) and near-impulse
        bright distractors (sigma 0.30-0.45) that mimic glint/hot pixels.
    roc: 64x64, one noise-free target at the exact image center on a flat
        background (amplitude 0.45-0.85; sigma alternates between a compact
        1.2-2.0 and an extended 4.5-6.0 population). Centered placement and
        the absence of speckle keep threshold sweeps well-behaved under
        centroid matching (speckle merging makes target-level detection
        genuinely non-monotone at low thresholds), while the extended
        targets only match once enough of their gradient ring is above
        threshold, so pd grows non-trivially along the sweep.
    multiTarget: 96x96, 2-5 targets separated by more than 4x the largest
        sigma, light noise, flat background.
    """
    if n < 1:
        raise ConfigurationError("suite size must be >= 1")
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2 ** 63 - 1, size=n)
    scenes = []
    for i in range(n):
        if kind == "localization":
            h = w = 128
            amp = rng.uniform(0.5, 0.85)
            spec = SceneSpec(
                height=h, width=w,
                targets=(TargetSpec(
                    row=rng.uniform(14, h - 15), col=rng.uniform(14, w - 15),
                    amplitude=amp, sigma=rng.uniform(1.2, 1.8),
                ),),
                background=BackgroundSpec(
                    base=rng.uniform(0.10, 0.25),
                    ramp=(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)),
                ),
                clutter=(
                    ClutterSpec(count=3, amplitude=(0.08, 0.20), sigma=(6.0, 12.0)),
                    ClutterSpec(count=4, amplitude=(0.30, 0.42), sigma=(0.30, 0.45)),
                ),
                noise_sigma=amp / rng.uniform(4.0, 10.0),
                seed=int(seeds[i]),
            )
        elif kind == "roc":
            h = w = 64
            compact = i % 2 == 0
            spec = SceneSpec(
                height=h, width=w,
                targets=(TargetSpec(
                    row=(h - 1) / 2.0, col=(w - 1) / 2.0,
                    amplitude=rng.uniform(0.45, 0.85),
                    sigma=rng.uniform(1.2, 2.0) if compact else rng.uniform(4.5, 6.0),
                ),),
                background=BackgroundSpec(base=rng.uniform(0.10, 0.30)),
                noise_sigma=0.0,
                seed=int(seeds[i]),
            )
        elif kind == "multiTarget":
            h = w = 96
            count = int(rng.integers(2, 6))
            sigmas = rng.uniform(1.0, 1.8, size=count)
            min_dist = 4.0 * float(sigmas.max()) + 2.0
            centers = _separated_centers(rng, count, h, w, margin=10,
                                         min_dist=min_dist)
            targets = []
            for (r, c), sig in zip(centers, sigmas):
                stretch = rng.uniform(1.0, 1.4)
                targets.append(TargetSpec(
                    row=r, col=c, amplitude=rng.uniform(0.5, 0.8),
                    sigma=float(sig), sigma_col=float(sig * stretch),
                ))
            spec = SceneSpec(
                height=h, width=w, targets=tuple(targets),
                background=BackgroundSpec(base=rng.uniform(0.10, 0.25)),
                noise_sigma=rng.uniform(0.02, 0.05),
                seed=int(seeds[i]),
            )
        else:
            raise ConfigurationError(f"unknown suite kind {kind!r}")
        scenes.append(render_scene(spec))
    return scenes
