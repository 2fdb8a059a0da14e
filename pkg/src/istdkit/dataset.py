"""PNG dataset ingestion and score-map persistence.

Layout: a dataset root holds `images/` and `masks/` with pairs matched by
file stem. Images are 8- or 16-bit grayscale PNG, normalized to [0, 1] by
the container maximum (255 or 65535). Masks binarize as nonzero -> 1.
Stems iterate in lexicographic string order ("a10" sorts before "a2").

Score maps are written twice: a 16-bit PNG for viewing and a .npy float32
dump for exact downstream math (PNG quantization would perturb ROC
sweeps).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InputError


def _open_gray(path: Path) -> tuple[np.ndarray, int]:
    img = Image.open(path)
    if img.mode == "L":
        return np.asarray(img, dtype=np.float64), 255
    if img.mode in ("I", "I;16", "I;16B"):
        return np.asarray(img, dtype=np.float64), 65535
    if img.mode == "1":
        return np.asarray(img, dtype=np.float64), 1
    raise InputError(f"not a grayscale PNG ({img.mode}): {path}")


def load_image(path) -> np.ndarray:
    arr, container_max = _open_gray(Path(path))
    return (arr / container_max).astype(np.float32)[:, :, None]


def load_mask(path) -> np.ndarray:
    arr, _ = _open_gray(Path(path))
    return arr != 0


def save_image16(path, values01) -> None:
    arr = np.asarray(values01, dtype=np.float64)
    if arr.ndim == 3:
        arr = arr[:, :, 0]
    q = np.clip(np.rint(arr * 65535.0), 0, 65535).astype(np.uint16)
    Image.fromarray(q).save(path)


def save_mask(path, mask) -> None:
    m = (np.asarray(mask, dtype=bool) * np.uint8(255))
    Image.fromarray(m, mode="L").save(path)


def save_score(out_dir, stem: str, score) -> None:
    out_dir = Path(out_dir)
    arr = np.asarray(score, dtype=np.float32)
    if arr.ndim == 3:
        arr = arr[:, :, 0]
    save_image16(out_dir / f"{stem}.png", arr)
    np.save(out_dir / f"{stem}.npy", arr)


def load_score(pred_dir, stem: str) -> np.ndarray:
    """Exact .npy dump when present, else a [0,1]-normalized PNG."""
    pred_dir = Path(pred_dir)
    npy = pred_dir / f"{stem}.npy"
    if npy.exists():
        return np.asarray(np.load(npy), dtype=np.float32)
    png = pred_dir / f"{stem}.png"
    if png.exists():
        return load_image(png)[:, :, 0]
    raise InputError(f"no prediction for stem {stem!r} in {pred_dir}")


def dataset_stems(root) -> list[str]:
    images = Path(root) / "images"
    if not images.is_dir():
        raise InputError(f"missing images/ directory under {root}")
    return sorted(p.stem for p in images.glob("*.png"))


def iter_dataset(root, mode: str = "masked"):
    """Yield (stem, image, mask-or-None) in lexicographic stem order."""
    if mode not in ("scored", "masked"):
        raise InputError(f"unknown dataset mode {mode!r}")
    root = Path(root)
    for stem in dataset_stems(root):
        image = load_image(root / "images" / f"{stem}.png")
        mask = None
        if mode == "masked":
            mask_path = root / "masks" / f"{stem}.png"
            if not mask_path.exists():
                raise InputError(f"missing mask for stem {stem!r}")
            mask = load_mask(mask_path)
            if mask.shape != image.shape[:2]:
                raise InputError(
                    f"image/mask dimensions differ for stem {stem!r}: "
                    f"{image.shape[:2]} vs {mask.shape}"
                )
        yield stem, image, mask
