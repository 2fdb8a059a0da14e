"""Run configuration: defaults plus a plain-text key = value file format.

Recognized keys (case-sensitive): baseChannels, sigmaRule, matchRadius,
thresholdCount, topHatRadius, mpcmScales, threads. Lines starting with '#'
are comments. Unknown keys are rejected by name.

sigmaRule is either "default" (per-scale sigma (k-1)/4) or three
comma-separated floats for the 3x3, 5x5, 7x7 scales.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigurationError


@dataclass(frozen=True)
class RunConfig:
    base_channels: int = 16
    sigma_rule: tuple[float, float, float] | None = None  # None -> (k-1)/4
    match_radius: float = 3.0
    threshold_count: int = 101
    top_hat_radius: int = 4
    mpcm_scales: tuple[int, ...] = (3, 5, 7)
    threads: int = 1


def _parse_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigurationError(f"{key}: expected a number, got {raw!r}") from None


def parse_config(path) -> RunConfig:
    cfg = RunConfig()
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key = value, got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key == "baseChannels":
            cfg = replace(cfg, base_channels=_parse_int(key, raw))
        elif key == "sigmaRule":
            if raw == "default":
                cfg = replace(cfg, sigma_rule=None)
            else:
                parts = [_parse_float(key, p) for p in raw.split(",")]
                if len(parts) != 3:
                    raise ConfigurationError(
                        f"{key}: expected 'default' or three comma-separated values"
                    )
                cfg = replace(cfg, sigma_rule=tuple(parts))
        elif key == "matchRadius":
            cfg = replace(cfg, match_radius=_parse_float(key, raw))
        elif key == "thresholdCount":
            cfg = replace(cfg, threshold_count=_parse_int(key, raw))
        elif key == "topHatRadius":
            cfg = replace(cfg, top_hat_radius=_parse_int(key, raw))
        elif key == "mpcmScales":
            cfg = replace(cfg, mpcm_scales=tuple(
                _parse_int(key, p) for p in raw.split(",")))
        elif key == "threads":
            cfg = replace(cfg, threads=_parse_int(key, raw))
        else:
            raise ConfigurationError(f"unknown config key: {key}")
    if cfg.base_channels < 4 or cfg.base_channels % 4:
        raise ConfigurationError("baseChannels must be a positive multiple of 4")
    if cfg.threshold_count < 2:
        raise ConfigurationError("thresholdCount must be >= 2")
    if cfg.threads < 1:
        raise ConfigurationError("threads must be >= 1")
    return cfg
