"""
Cross-layer scale invariance measurements (spectral and geometric).
"""

from src.invariance.geometric import (
    CMDS,
    DEFAULT_FIT_PERCENTILES,
    DEFAULT_FIT_POINTS,
    PCA,
    REDUCERS,
    CorrDimFit,
    CorrIntegralCurve,
    GeomInvarianceReport,
    corr_dim,
    corr_dim_fit,
    corr_integral,
    geom_invariance,
    reduce_dim,
    relative_spread,
)
from src.invariance.statistical import (
    Spectrum,
    StatInvarianceReport,
    covariance_spectrum,
    pareto_sample,
    population_sigma,
    power_law_mle,
    spectrum_from_values,
    stat_invariance,
)

__all__ = [
    "CMDS",
    "DEFAULT_FIT_PERCENTILES",
    "DEFAULT_FIT_POINTS",
    "PCA",
    "REDUCERS",
    "CorrDimFit",
    "CorrIntegralCurve",
    "GeomInvarianceReport",
    "Spectrum",
    "StatInvarianceReport",
    "corr_dim",
    "corr_dim_fit",
    "corr_integral",
    "covariance_spectrum",
    "geom_invariance",
    "pareto_sample",
    "population_sigma",
    "power_law_mle",
    "reduce_dim",
    "relative_spread",
    "spectrum_from_values",
    "stat_invariance",
]
