"""Forward-only infrared small target detection toolkit.

Core pieces: a frozen multi-orientation derivative-of-Gaussian filter bank
feeding two collaborative priors (a saliency map and a structural feature
pyramid), a nested encoder-decoder network that embeds them, classical
top-hat / patch-contrast baselines, detection metrics with ROC sweeps, and
a seeded synthetic scene generator for verification.
"""

from .config import RunConfig, parse_config
from .network import (
    NetworkConfig,
    agfem_head,
    bottom_up_gate,
    chkim_fuse,
    dnim_forward,
    forward,
    init_random_store,
    init_zero_store,
    top_down_gate,
    validate_store,
)
from .priors import (
    GdKernel,
    GdKernelBank,
    build_gd_kernel,
    build_kernel_bank,
    extract_cp1,
    extract_cp2,
    gradient_magnitude,
)
from .synth import LabeledScene, SceneSpec, TargetSpec, make_suite, render_scene
from .weights import WeightStore, load_weights, save_weights

__all__ = [
    "GdKernel",
    "GdKernelBank",
    "LabeledScene",
    "NetworkConfig",
    "RunConfig",
    "SceneSpec",
    "TargetSpec",
    "WeightStore",
    "agfem_head",
    "bottom_up_gate",
    "build_gd_kernel",
    "build_kernel_bank",
    "chkim_fuse",
    "dnim_forward",
    "extract_cp1",
    "extract_cp2",
    "forward",
    "gradient_magnitude",
    "init_random_store",
    "init_zero_store",
    "load_weights",
    "make_suite",
    "parse_config",
    "render_scene",
    "save_weights",
    "top_down_gate",
    "validate_store",
]
