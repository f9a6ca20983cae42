# protocol package
# Run configuration and every report written by the CLI

from .config import FamilySpec, RunConfig, WeightSpec, config_hash
from .results import (
    DichotomyRecord,
    DimensionReport,
    ErrorReport,
    GrowthRecord,
    LevelRecord,
    MetricReport,
    MinimalityRecord,
    NetworkReport,
    OutputHeader,
    PartitionReport,
    PositivityRecord,
    RectangleRecord,
    ResolutionReport,
    SeparationRecord,
    SpectralRecord,
    SubmultiplicativityRecord,
    SweepReport,
    ThicknessRecord,
    TraceRecord,
    ValidateReport,
    WeightCheckRecord,
)

__all__ = [
    "FamilySpec",
    "RunConfig",
    "WeightSpec",
    "config_hash",
    "DichotomyRecord",
    "DimensionReport",
    "ErrorReport",
    "GrowthRecord",
    "LevelRecord",
    "MetricReport",
    "MinimalityRecord",
    "NetworkReport",
    "OutputHeader",
    "PartitionReport",
    "PositivityRecord",
    "RectangleRecord",
    "ResolutionReport",
    "SeparationRecord",
    "SpectralRecord",
    "SubmultiplicativityRecord",
    "SweepReport",
    "ThicknessRecord",
    "TraceRecord",
    "ValidateReport",
    "WeightCheckRecord",
]
