"""Command-line entry point.

    istd prior    --input DATASET --out DIR [--config FILE] [--threads N]
    istd infer    --input DATASET --weights FILE --out DIR [...]
    istd baseline --input DATASET --method tophat|mpcm --out DIR [...]
    istd eval     --input DATASET --pred DIR --out DIR [...]
    istd roc      --input DATASET --pred DIR --out DIR [...]
    istd synth    --out DIR [--family F] [--count N] [--seed S]

Exit codes: 0 ok, 1 input error, 2 weight/config error. Failures print a
single machine-parsable line `istd: error: <kind>: <message>` on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import baselines, dataset, metrics, network, priors, report, synth
from .config import RunConfig, parse_config
from .errors import ConfigurationError, InputError, WeightsError
from .weights import load_weights


def _emit_error(kind: str, exc: Exception) -> None:
    msg = str(exc).replace("\n", " ")
    print(f"istd: error: {kind}: {msg}", file=sys.stderr)


def _load_config(args) -> RunConfig:
    cfg = parse_config(args.config) if args.config else RunConfig()
    if getattr(args, "threads", None):
        cfg = dataclasses.replace(cfg, threads=args.threads)
    return cfg


def _build_bank(cfg: RunConfig) -> priors.GdKernelBank:
    return priors.build_kernel_bank(sigmas=cfg.sigma_rule)


def _map_ordered(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _collect(args, mode: str):
    items = list(dataset.iter_dataset(args.input, mode))
    if not items:
        print("istd: warning: empty dataset", file=sys.stderr)
    return items


def _write_scores(args, cfg: RunConfig, scorer) -> int:
    items = _collect(args, "scored")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scored = _map_ordered(lambda item: (item[0], scorer(item[1])), items, cfg.threads)
    for stem, score in scored:
        dataset.save_score(out, stem, score)
    return 0


def cmd_prior(args) -> int:
    cfg = _load_config(args)
    bank = _build_bank(cfg)
    return _write_scores(args, cfg, lambda img: priors.extract_cp1(img, bank))


def cmd_infer(args) -> int:
    cfg = _load_config(args)
    bank = _build_bank(cfg)
    store = load_weights(args.weights)
    net_cfg = network.NetworkConfig(base_channels=cfg.base_channels)
    network.validate_store(store, net_cfg)
    return _write_scores(
        args, cfg, lambda img: network.forward(img, bank, store, net_cfg)
    )


def cmd_baseline(args) -> int:
    cfg = _load_config(args)
    if args.method == "tophat":
        se = baselines.StructuringElement(radius=cfg.top_hat_radius)
        scorer = lambda img: baselines.top_hat(img, se)
    else:
        scorer = lambda img: baselines.mpcm(img, cfg.mpcm_scales)
    return _write_scores(args, cfg, scorer)


def _binarize_prediction(score: np.ndarray) -> np.ndarray:
    plane = score[:, :, 0] if score.ndim == 3 else score
    return plane >= 0.5


def cmd_eval(args) -> int:
    cfg = _load_config(args)
    items = _collect(args, "masked")

    def one(item):
        stem, image, mask = item
        pred = _binarize_prediction(dataset.load_score(args.pred, stem))
        if pred.shape != mask.shape:
            raise InputError(f"prediction/mask shape mismatch for stem {stem!r}")
        return report.ImageResult(
            stem=stem,
            confusion=metrics.confusion(pred, mask),
            pdfa=metrics.pd_fa(pred, mask, cfg.match_radius),
        )

    results = _map_ordered(one, items, cfg.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rep = report.build_report(results)
    report.write_report_json(out / "eval_report.json", rep)
    report.write_report_csv(out / "eval_report.csv", rep)
    return 0


def cmd_roc(args) -> int:
    cfg = _load_config(args)
    items = _collect(args, "masked")
    loaded = _map_ordered(
        lambda item: (dataset.load_score(args.pred, item[0]), item[2]),
        items, cfg.threads,
    )
    scores = [s for s, _ in loaded]
    gts = [g for _, g in loaded]
    curve = metrics.roc_curve(
        scores, gts,
        thresholds=metrics.default_thresholds(cfg.threshold_count),
        match_radius=cfg.match_radius,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.write_roc_csv(out / "roc.csv", curve)
    return 0


def cmd_synth(args) -> int:
    scenes = synth.make_suite(args.family, args.count, args.seed)
    out = Path(args.out)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(len(scenes) - 1)))
    manifest = []
    for i, scene in enumerate(scenes):
        stem = f"scene_{i:0{width}d}"
        dataset.save_image16(out / "images" / f"{stem}.png", scene.image)
        dataset.save_mask(out / "masks" / f"{stem}.png", scene.mask)
        entry = dataclasses.asdict(scene.spec)
        entry["stem"] = stem
        entry["snr"] = scene.snr if scene.snr != float("inf") else None
        manifest.append(entry)
    (out / "scenes.json").write_text(json.dumps(
        {"family": args.family, "count": args.count, "seed": args.seed,
         "scenes": manifest},
        sort_keys=True, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="istd",
        description="Infrared small target detection toolkit "
                    "(priors, inference, baselines, metrics, synthetic data).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="dataset root directory")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--config", help="key = value run configuration file")
        p.add_argument("--threads", type=int, help="worker threads (default: config)")

    p = sub.add_parser("prior", help="write saliency-prior score maps")
    common(p)
    p.set_defaults(func=cmd_prior)

    p = sub.add_parser("infer", help="run the full network forward pass")
    common(p)
    p.add_argument("--weights", required=True, help="binary weight file")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("baseline", help="score with a classical baseline")
    common(p)
    p.add_argument("--method", required=True, choices=("tophat", "mpcm"))
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval", help="evaluate predictions against masks")
    common(p)
    p.add_argument("--pred", required=True, help="prediction directory")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("roc", help="threshold sweep over score maps")
    common(p)
    p.add_argument("--pred", required=True, help="score-map directory")
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    common(p, needs_input=False)
    p.add_argument("--family", default="localization",
                   choices=("localization", "roc", "multiTarget"))
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        _emit_error("input", exc)
        return 1
    except ConfigurationError as exc:
        _emit_error("config", exc)
        return 2
    except WeightsError as exc:
        _emit_error("weights", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
