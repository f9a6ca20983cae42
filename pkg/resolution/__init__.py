# resolution package

from .graph import (
    ResolutionGraph,
    build_resolution,
    graph_distance,
    gromov_eta,
    gromov_product,
    horizontally_minimal_scan,
    rearranged_resolution,
)

__all__ = [
    "ResolutionGraph",
    "build_resolution",
    "graph_distance",
    "gromov_eta",
    "gromov_product",
    "horizontally_minimal_scan",
    "rearranged_resolution",
]
