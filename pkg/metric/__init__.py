# metric package
# Visual pre-metrics, chain distances and adaptedness diagnostics

from .visual_metric import (
    adaptedness_report,
    chain_distance,
    chain_metric,
    delta,
    neighborhood,
    separation_witnesses,
)

__all__ = [
    "adaptedness_report",
    "chain_distance",
    "chain_metric",
    "delta",
    "neighborhood",
    "separation_witnesses",
]
