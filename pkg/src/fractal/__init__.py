"""
Self-similarity metric of feature networks: simulated box counting,
SS_rate, its gradient, and box-dimension fits.
"""

from src.fractal.grid import (
    DEFAULT_FAC,
    DEFAULT_GRID_COUNT,
    DEFAULT_K,
    SmoothingParams,
    ThresholdGrid,
    data_grid,
    lo,
)
from src.fractal.metric import (
    BOUNDED,
    HARD,
    MODES,
    NORMALIZER_MODES,
    PAPER_LITERAL,
    SMOOTH,
    BoxCurve,
    PowerLawFit,
    SsRateResult,
    box_count,
    box_counts,
    box_curve,
    connect_prob,
    fit_power_law,
    fractal_dim_fit,
    pf,
    ss_rate,
)
from src.fractal.gradient import (
    GradCheckResult,
    check_ss_rate_grad,
    max_relative_error,
    ss_rate_grad,
    ss_rate_value_and_grad,
)
from src.fractal.report import curve_from_report, curve_report

__all__ = [
    "BOUNDED",
    "DEFAULT_FAC",
    "DEFAULT_GRID_COUNT",
    "DEFAULT_K",
    "HARD",
    "MODES",
    "NORMALIZER_MODES",
    "PAPER_LITERAL",
    "SMOOTH",
    "BoxCurve",
    "GradCheckResult",
    "PowerLawFit",
    "SmoothingParams",
    "SsRateResult",
    "ThresholdGrid",
    "box_count",
    "box_counts",
    "box_curve",
    "check_ss_rate_grad",
    "connect_prob",
    "curve_from_report",
    "curve_report",
    "data_grid",
    "fit_power_law",
    "fractal_dim_fit",
    "lo",
    "max_relative_error",
    "pf",
    "ss_rate",
    "ss_rate_grad",
    "ss_rate_value_and_grad",
]
