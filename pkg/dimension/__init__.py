# dimension package
# Decay rates, critical exponents and spectral dimensions from energy sweeps

from .estimators import (
    DimensionEstimate,
    RateEstimate,
    conformal_dimension,
    dichotomy_report,
    positivity_diagnostic,
    rate,
    rate_from_values,
    spectral_dimension,
    volume_bound,
)

__all__ = [
    "DimensionEstimate",
    "RateEstimate",
    "conformal_dimension",
    "dichotomy_report",
    "positivity_diagnostic",
    "rate",
    "rate_from_values",
    "spectral_dimension",
    "volume_bound",
]
