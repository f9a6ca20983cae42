# fractal package
# Trees, exact geometry, partitions of compact sets and weight functions

from .tree import ROOT, Address, TreeShape, confluence, format_address, parse_address
from .geometry import Box, Point, parse_point
from .partition import (
    BoxTableFamily,
    DyadicCubeFamily,
    PartitionFamily,
    SelfSimilarFamily,
    SquareWithHolesFamily,
)
from .weight import Exact, ScaleSet, WeightFunction, scale_set

__all__ = [
    "ROOT",
    "Address",
    "TreeShape",
    "confluence",
    "format_address",
    "parse_address",
    "Box",
    "Point",
    "parse_point",
    "BoxTableFamily",
    "DyadicCubeFamily",
    "PartitionFamily",
    "SelfSimilarFamily",
    "SquareWithHolesFamily",
    "Exact",
    "ScaleSet",
    "WeightFunction",
    "scale_set",
]
