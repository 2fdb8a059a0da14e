"""Classical saliency baselines for the prior-comparison harness.

Both emit [0, 1] maps via the same min-max rule as the saliency prior, so
they drop into the ROC/detection harness unchanged. Borders are handled by
edge replication.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ConfigurationError
from .priors import minmax_normalize
from .tensor import as_tensor


@dataclass(frozen=True)
class StructuringElement:
    radius: int
    shape: str = "disk"

    def __post_init__(self):
        if self.radius < 1:
            raise ConfigurationError(f"radius must be >= 1, got {self.radius}")
        if self.shape not in ("disk", "square"):
            raise ConfigurationError(f"unknown element shape {self.shape!r}")

    @property
    def footprint(self) -> np.ndarray:
        r = self.radius
        if self.shape == "square":
            return np.ones((2 * r + 1, 2 * r + 1), dtype=bool)
        y, x = np.mgrid[-r:r + 1, -r:r + 1]
        return (y * y + x * x) <= r * r


def _plane(image) -> np.ndarray:
    return as_tensor(image)[:, :, 0].astype(np.float64)


def opening(image, se: StructuringElement) -> np.ndarray:
    """Grayscale opening (erosion then dilation), edge-replicated borders."""
    plane = _plane(image)
    fp = se.footprint
    eroded = ndimage.grey_erosion(plane, footprint=fp, mode="nearest")
    opened = ndimage.grey_dilation(eroded, footprint=fp, mode="nearest")
    return opened.astype(np.float32)[:, :, None]


def top_hat(image, se: StructuringElement | None = None,
            normalize: bool = True) -> np.ndarray:
    """White top-hat: image minus its opening, optionally min-max scaled."""
    image = as_tensor(image)
    if se is None:
        se = StructuringElement(radius=4)
    if se.radius >= min(image.shape[0], image.shape[1]) / 2:
        raise ConfigurationError(
            f"element radius {se.radius} too large for {image.shape[0]}x{image.shape[1]} image"
        )
    residue = np.maximum(image - opening(image, se), np.float32(0.0))
    return minmax_normalize(residue) if normalize else residue


def mpcm(image, patch_sizes=(3, 5, 7), normalize: bool = True) -> np.ndarray:
    """Multiscale patch contrast (bright-target form).

    For each cell side s, a pixel's center-cell mean is compared against the
    eight surrounding cell means on a 3x3 cell grid; each of the four
    direction scores multiplies the differences toward a cell and its
    diametric opposite, the scale score is the minimum over directions, and
    the output takes the maximum over scales (clamped at zero). Cells that
    reach past the image border sample edge-replicated pixels.
    """
    plane = _plane(image)
    h, w = plane.shape
    opposing = [((-1, -1), (1, 1)), ((-1, 0), (1, 0)),
                ((-1, 1), (1, -1)), ((0, 1), (0, -1))]
    best = None
    for s in patch_sizes:
        if s < 1 or s % 2 == 0:
            raise ConfigurationError(f"cell side must be odd and >= 1, got {s}")
        padded = np.pad(plane, s, mode="edge")
        means = ndimage.uniform_filter(padded, size=s, mode="nearest")

        def cell(dy, dx):
            return means[s + dy * s:s + dy * s + h, s + dx * s:s + dx * s + w]

        center = cell(0, 0)
        contrast = None
        for (ady, adx), (bdy, bdx) in opposing:
            d = (center - cell(ady, adx)) * (center - cell(bdy, bdx))
            contrast = d if contrast is None else np.minimum(contrast, d)
        best = contrast if best is None else np.maximum(best, contrast)
    out = np.maximum(best, 0.0).astype(np.float32)[:, :, None]
    return minmax_normalize(out) if normalize else out
