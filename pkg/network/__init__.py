# network package
# Horizontal networks over partition levels and their diagnostics

from .systems import (
    CellSystem,
    CornerLatticeSystem,
    EdgeSharingSystem,
    HorizontalNetwork,
    LocalProblem,
    ProperSystem,
    RebuiltSystem,
    build_network,
    gamma,
    local_problem,
    make_system,
    refine,
)
from .analysis import balanced_check_bounded, growth_rates, validate_proper_system

__all__ = [
    "CellSystem",
    "CornerLatticeSystem",
    "EdgeSharingSystem",
    "HorizontalNetwork",
    "LocalProblem",
    "ProperSystem",
    "RebuiltSystem",
    "build_network",
    "gamma",
    "local_problem",
    "make_system",
    "refine",
    "balanced_check_bounded",
    "growth_rates",
    "validate_proper_system",
]
