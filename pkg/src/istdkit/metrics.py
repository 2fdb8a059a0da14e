"""Pixel- and target-level detection metrics plus ROC sweeps.

Conventions, applied uniformly:
  * components use 8-connectivity; centroids are the plain mean of pixel
    coordinates (row, col);
  * a ground-truth component counts as detected when some predicted
    component's centroid lies within `match_radius` (Euclidean), matched
    greedily nearest-first with ties broken by smaller ground-truth row
    then column (then predicted row/column), one prediction per target;
  * the false-alarm rate counts every predicted-positive pixel outside the
    ground truth, over all pixels;
  * dataset aggregates sum numerators and denominators, never average
    ratios, so they are independent of image order;
  * degenerate cases: empty prediction and empty truth give IoU = F1 = 1;
    a dataset with no true targets reports detection probability 1 with
    `vacuous` flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import InputError

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def _as_mask(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim == 3 and m.shape[2] == 1:
        m = m[:, :, 0]
    if m.ndim != 2:
        raise InputError(f"mask must be 2-D, got shape {m.shape}")
    return m.astype(bool)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)


def confusion(pred, gt) -> ConfusionCounts:
    pred = _as_mask(pred)
    gt = _as_mask(gt)
    if pred.shape != gt.shape:
        raise InputError(f"mask shape mismatch: {pred.shape} vs {gt.shape}")
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    tn = int(np.count_nonzero(~pred & ~gt))
    return ConfusionCounts(tp, fp, fn, tn)


def pixel_metrics(c: ConfusionCounts) -> dict[str, float]:
    """IoU, precision, recall, F1 from pixel counts.

    Empty-vs-empty scores 1 across the board; any other 0/0 ratio is 0.
    """
    if c.tp + c.fp + c.fn == 0:
        return {"iou": 1.0, "precision": 1.0, "recall": 1.0, "f1": 1.0}
    iou = c.tp / (c.tp + c.fp + c.fn)
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return {"iou": iou, "precision": precision, "recall": recall, "f1": f1}


@dataclass(frozen=True)
class Component:
    centroid: tuple[float, float]
    pixel_count: int


@dataclass(frozen=True)
class TargetSet:
    labels: np.ndarray
    components: tuple[Component, ...]


def detect_targets(mask) -> TargetSet:
    """8-connected components of a binary mask with float centroids."""
    mask = _as_mask(mask)
    labels, count = ndimage.label(mask, structure=EIGHT_CONNECTED)
    if count == 0:
        return TargetSet(labels=labels, components=())
    rows, cols = np.nonzero(labels)
    ids = labels[rows, cols]
    sizes = np.bincount(ids, minlength=count + 1)[1:]
    row_sums = np.bincount(ids, weights=rows, minlength=count + 1)[1:]
    col_sums = np.bincount(ids, weights=cols, minlength=count + 1)[1:]
    comps = tuple(
        Component(centroid=(rs / n, cs / n), pixel_count=int(n))
        for rs, cs, n in zip(row_sums, col_sums, sizes)
    )
    return TargetSet(labels=labels, components=comps)


@dataclass
class PdFaCounts:
    correct: int = 0
    total: int = 0
    false_pixels: int = 0
    all_pixels: int = 0

    def __add__(self, other: "PdFaCounts") -> "PdFaCounts":
        return PdFaCounts(self.correct + other.correct,
                          self.total + other.total,
                          self.false_pixels + other.false_pixels,
                          self.all_pixels + other.all_pixels)

    @property
    def vacuous(self) -> bool:
        return self.total == 0

    @property
    def pd(self) -> float:
        return 1.0 if self.vacuous else self.correct / self.total

    @property
    def fa(self) -> float:
        return self.false_pixels / self.all_pixels if self.all_pixels else 0.0


def pd_fa(pred, gt, match_radius: float = 3.0) -> PdFaCounts:
    """Target-level detection and pixel-level false-alarm counts for one image."""
    pred = _as_mask(pred)
    gt = _as_mask(gt)
    if pred.shape != gt.shape:
        raise InputError(f"mask shape mismatch: {pred.shape} vs {gt.shape}")
    gt_comps = detect_targets(gt).components
    pred_comps = detect_targets(pred).components

    pairs = []
    if gt_comps and pred_comps:
        gc = np.array([g.centroid for g in gt_comps])
        pc = np.array([p.centroid for p in pred_comps])
        dist = np.sqrt(((gc[:, None, :] - pc[None, :, :]) ** 2).sum(axis=-1))
        for gi, pi in np.argwhere(dist <= match_radius):
            pairs.append((float(dist[gi, pi]), tuple(gc[gi]), tuple(pc[pi]),
                          int(gi), int(pi)))
    pairs.sort()
    gt_used: set[int] = set()
    pred_used: set[int] = set()
    correct = 0
    for _, _, _, gi, pi in pairs:
        if gi in gt_used or pi in pred_used:
            continue
        gt_used.add(gi)
        pred_used.add(pi)
        correct += 1

    return PdFaCounts(
        correct=correct,
        total=len(gt_comps),
        false_pixels=int(np.count_nonzero(pred & ~gt)),
        all_pixels=pred.size,
    )


def default_thresholds(count: int = 101) -> np.ndarray:
    """`count` values evenly spaced from 1.0 down to 0.0."""
    return np.linspace(1.0, 0.0, count)


@dataclass(frozen=True)
class RocSample:
    threshold: float
    pd: float
    fa: float
    vacuous: bool = False


@dataclass(frozen=True)
class RocCurve:
    samples: tuple[RocSample, ...] = field(default_factory=tuple)

    def thresholds(self) -> np.ndarray:
        return np.array([s.threshold for s in self.samples])

    def pds(self) -> np.ndarray:
        return np.array([s.pd for s in self.samples])

    def fas(self) -> np.ndarray:
        return np.array([s.fa for s in self.samples])


def roc_curve(score_maps, gts, thresholds=None, match_radius: float = 3.0) -> RocCurve:
    """Sweep binarization thresholds (score >= t) over a whole dataset,
    aggregating detection/false-alarm counts per threshold."""
    if thresholds is None:
        thresholds = default_thresholds()
    score_maps = [np.asarray(s, dtype=np.float32) for s in score_maps]
    gts = [_as_mask(g) for g in gts]
    if len(score_maps) != len(gts):
        raise InputError("need one ground-truth mask per score map")
    samples = []
    for t in thresholds:
        agg = PdFaCounts()
        for s, g in zip(score_maps, gts):
            plane = s[:, :, 0] if s.ndim == 3 else s
            agg = agg + pd_fa(plane >= t, g, match_radius)
        samples.append(RocSample(threshold=float(t), pd=agg.pd, fa=agg.fa,
                                 vacuous=agg.vacuous))
    return RocCurve(samples=tuple(samples))


def check_roc(curve: RocCurve) -> None:
    """Raise if thresholds are not strictly decreasing or pd/fa ever drop."""
    t = curve.thresholds()
    if np.any(np.diff(t) >= 0):
        raise InputError("thresholds must be strictly decreasing")
    if np.any(np.diff(curve.pds()) < 0):
        raise InputError("pd decreased along the sweep")
    if np.any(np.diff(curve.fas()) < 0):
        raise InputError("fa decreased along the sweep")
