# tools package
# Configuration loading, family/weight builders and output writers

from .loaders import apply_overrides, load_config, load_pairs, load_points, load_weight_table, resolve_threads
from .builders import build_family, build_system, build_weight
from .outputs import OutputWriter, exact_text

__all__ = [
    "apply_overrides",
    "load_config",
    "load_pairs",
    "load_points",
    "load_weight_table",
    "resolve_threads",
    "build_family",
    "build_system",
    "build_weight",
    "OutputWriter",
    "exact_text",
]
