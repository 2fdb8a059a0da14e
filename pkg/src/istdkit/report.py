"""Detection report assembly and deterministic emission.

The JSON report is schema-versioned and serialized canonically (sorted
keys, fixed separators, repr-exact floats), so identical inputs produce
byte-identical files regardless of worker count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .metrics import ConfusionCounts, PdFaCounts, RocCurve, pixel_metrics

SCHEMA_VERSION = 1


@dataclass
class ImageResult:
    stem: str
    confusion: ConfusionCounts
    pdfa: PdFaCounts


def build_report(results: list[ImageResult]) -> dict:
    agg_conf = ConfusionCounts(0, 0, 0, 0)
    agg_pdfa = PdFaCounts()
    per_image = []
    for r in results:
        m = pixel_metrics(r.confusion)
        per_image.append({
            "stem": r.stem,
            "iou": m["iou"],
            "f1": m["f1"],
            "precision": m["precision"],
            "recall": m["recall"],
            "targets": r.pdfa.total,
            "detected": r.pdfa.correct,
            "false_pixels": r.pdfa.false_pixels,
        })
        agg_conf = agg_conf + r.confusion
        agg_pdfa = agg_pdfa + r.pdfa
    agg_metrics = pixel_metrics(agg_conf)
    return {
        "schema_version": SCHEMA_VERSION,
        "images": per_image,
        "aggregate": {
            "iou": agg_metrics["iou"],
            "f1": agg_metrics["f1"],
            "precision": agg_metrics["precision"],
            "recall": agg_metrics["recall"],
            "pd": agg_pdfa.pd,
            "pd_vacuous": agg_pdfa.vacuous,
            "fa": agg_pdfa.fa,
            "targets": agg_pdfa.total,
            "detected": agg_pdfa.correct,
            "false_pixels": agg_pdfa.false_pixels,
            "pixels": agg_pdfa.all_pixels,
        },
    }


def write_report_json(path, report: dict) -> None:
    Path(path).write_text(
        json.dumps(report, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"
    )


def write_report_csv(path, report: dict) -> None:
    lines = ["stem,iou,f1,precision,recall,targets,detected,false_pixels"]
    for row in report["images"]:
        lines.append(
            f"{row['stem']},{row['iou']!r},{row['f1']!r},{row['precision']!r},"
            f"{row['recall']!r},{row['targets']},{row['detected']},{row['false_pixels']}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_roc_csv(path, curve: RocCurve) -> None:
    """One `threshold,pd,fa` line per sample, no header."""
    lines = [f"{s.threshold:.6f},{s.pd!r},{s.fa!r}" for s in curve.samples]
    Path(path).write_text("\n".join(lines) + "\n")
