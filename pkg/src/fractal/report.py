"""
JSON rendering of box curves and SS_rate results.
"""

from typing import Optional

import numpy as np

from src.fractal.grid import ThresholdGrid
from src.fractal.metric import (
    SMOOTH,
    BoxCurve,
    PowerLawFit,
    SsRateResult,
    curve_warnings,
)


def curve_report(curve: BoxCurve, result: SsRateResult, fit: Optional[PowerLawFit] = None) -> dict:
    """
    Report dictionary for one curve.

    Keys: d, mode, normalizer_mode, thetas, p, n, d_B, residual, ss_rate,
    plus k, tz, tv, raw_integral and warnings.
    """
    return {
        "d": curve.d,
        "mode": curve.mode_label,
        "k": curve.k,
        "normalizer_mode": result.normalizer_mode,
        "tz": curve.grid.tz,
        "tv": curve.grid.tv,
        "thetas": curve.grid.thetas.tolist(),
        "p": curve.p.tolist(),
        "n": curve.n.tolist(),
        "d_B": fit.d_b if fit else None,
        "residual": fit.residual if fit else None,
        "raw_integral": result.raw_integral,
        "ss_rate": result.value,
        "warnings": curve_warnings(curve),
    }


def curve_from_report(report: dict) -> BoxCurve:
    """Rebuild a BoxCurve from a report produced by curve_report."""
    grid = ThresholdGrid(report["tz"], report["tv"], len(report["thetas"]))
    mode = SMOOTH if str(report["mode"]).startswith(SMOOTH) else "hard"
    return BoxCurve(
        grid=grid,
        p=np.asarray(report["p"], dtype=np.float64),
        n=np.asarray(report["n"], dtype=np.float64),
        d=int(report["d"]),
        mode=mode,
        k=report.get("k"),
    )
