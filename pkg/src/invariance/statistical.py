"""
Statistical scale invariance of hidden layers.

Each layer's covariance eigenspectrum is fitted with a power law
P(lambda) ~ lambda^(-gamma); the spread of gamma across layers measures how
stable the spectral scaling is through the network.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.featnet import FeatureMatrix
from src.utils.errors import DegenerateInputError, ValidationError

logger = logging.getLogger(__name__)

# Eigenvalues at or below this fraction of the largest one are dropped.
EIGEN_REL_TOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Positive eigenvalues of a covariance matrix, sorted descending."""

    eigenvalues: np.ndarray
    full: np.ndarray = field(repr=False)
    dropped_negative: int = 0

    def __post_init__(self):
        values = np.asarray(self.eigenvalues, dtype=np.float64)
        if values.ndim != 1:
            raise ValidationError("Spectrum eigenvalues must be 1-D")
        if values.size and (np.any(values <= 0) or np.any(np.diff(values) > 0)):
            raise ValidationError("Retained eigenvalues must be positive and sorted descending")
        object.__setattr__(self, "eigenvalues", values)

    @property
    def retained(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def lambda_min(self) -> float:
        if not self.retained:
            raise DegenerateInputError("Spectrum has no positive eigenvalues")
        return float(self.eigenvalues[-1])


def spectrum_from_values(values, rel_tol: float = EIGEN_REL_TOL) -> Spectrum:
    """
    Build a Spectrum from raw eigenvalues (or any positive sample).

    Values at or below rel_tol * max are treated as numerical zeros; negative
    values are counted as noise and dropped.
    """
    values = np.sort(np.asarray(values, dtype=np.float64).ravel())[::-1]
    if not np.all(np.isfinite(values)):
        raise ValidationError("Eigenvalues must be finite")
    top = float(values[0]) if values.size else 0.0
    keep = values > max(top, 0.0) * rel_tol if top > 0 else np.zeros(values.size, dtype=bool)
    negative = int(np.count_nonzero(values < -abs(top) * rel_tol))
    return Spectrum(eigenvalues=values[keep].copy(), full=values, dropped_negative=negative)


def covariance_spectrum(f: FeatureMatrix) -> Spectrum:
    """
    Eigenvalues of the D x D Gram form F F^T / (B - 1).

    Args:
        f: Feature matrix with B >= 2

    Returns:
        Spectrum: retained positive eigenvalues, descending
    """
    if f.b < 2:
        raise ValidationError(f"Covariance spectrum needs B >= 2, got B={f.b}")
    gram = f.data @ f.data.T / (f.b - 1)
    gram = (gram + gram.T) / 2.0
    spectrum = spectrum_from_values(np.linalg.eigvalsh(gram))
    if spectrum.dropped_negative:
        logger.debug(f"Dropped {spectrum.dropped_negative} negative eigenvalue(s) as numerical noise")
    return spectrum


def power_law_mle(s: Spectrum, literal_d: bool = False) -> float:
    """
    Hill-type maximum likelihood exponent of the eigenvalue distribution.

        gamma = 1 + n / sum_k ln(lambda_k / lambda_min)

    Args:
        s: Spectrum with at least 2 retained eigenvalues
        literal_d: Use the full matrix dimension for n instead of the
            retained count

    Returns:
        float: gamma > 1
    """
    if s.retained < 2:
        raise DegenerateInputError(f"Power-law fit needs at least 2 positive eigenvalues, got {s.retained}")
    log_ratios = np.log(s.eigenvalues / s.lambda_min)
    total = float(log_ratios.sum())
    if total <= 0.0:
        raise DegenerateInputError("degenerate spectrum: all retained eigenvalues are equal")
    n = s.full.size if literal_d else s.retained
    return 1.0 + n / total


def population_sigma(values: Sequence[float]) -> float:
    """Standard deviation with divisor |L|."""
    values = np.asarray(values, dtype=np.float64)
    return float(np.sqrt(np.mean((values - values.mean()) ** 2)))


@dataclass(frozen=True)
class StatInvarianceReport:
    """Per-layer exponents and their cross-layer spread."""

    layers: Tuple[int, ...]
    gammas: Tuple[float, ...]
    mean: float
    sigma: float
    excluded: Dict[int, str] = field(default_factory=dict)
    stage: str = "post-reduce"
    literal_d: bool = False

    def to_dict(self) -> dict:
        per_layer = []
        gammas = dict(zip(self.layers, self.gammas))
        for index in sorted(set(self.layers) | set(self.excluded)):
            per_layer.append({
                "layer": index,
                "gamma": gammas.get(index),
                "warnings": [self.excluded[index]] if index in self.excluded else [],
            })
        return {
            "kind": "statistical",
            "stage": self.stage,
            "literal_d": self.literal_d,
            "per_layer": per_layer,
            "mean": self.mean,
            "sigma": self.sigma,
        }


def stat_invariance(layers: List[FeatureMatrix], literal_d: bool = False,
                    show_progress: bool = False) -> StatInvarianceReport:
    """
    Fit gamma on every layer and report the population std across layers.

    Degenerate layers are excluded with a warning; fewer than two surviving
    layers is an error.

    Args:
        layers: Feature matrices, in network order
        literal_d: Passed to power_law_mle
        show_progress: Show a tqdm bar

    Returns:
        StatInvarianceReport
    """
    if len(layers) < 2:
        raise ValidationError(f"Statistical invariance needs at least 2 layers, got {len(layers)}")
    kept: List[int] = []
    gammas: List[float] = []
    excluded: Dict[int, str] = {}
    for index, layer in enumerate(tqdm(layers, desc="Spectra", disable=not show_progress)):
        try:
            gammas.append(power_law_mle(covariance_spectrum(layer), literal_d))
            kept.append(index)
        except ValidationError as e:
            excluded[index] = str(e)
            logger.warning(f"Layer {index} excluded from statistical invariance: {e}")
    if len(gammas) < 2:
        raise DegenerateInputError(f"Only {len(gammas)} layer(s) survived the power-law fit; need 2")
    return StatInvarianceReport(
        layers=tuple(kept),
        gammas=tuple(gammas),
        mean=float(np.mean(gammas)),
        sigma=population_sigma(gammas),
        excluded=excluded,
        stage=layers[0].stage,
        literal_d=literal_d,
    )


def pareto_sample(gamma: float, n: int, seed: int, x_min: float = 1.0,
                  rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Inverse-CDF sample from P(x) ~ x^(-gamma), x >= x_min."""
    if gamma <= 1.0:
        raise ValidationError(f"Pareto exponent must be > 1, got {gamma}")
    rng = rng or np.random.default_rng(seed)
    u = 1.0 - rng.random(n)
    return x_min * u ** (-1.0 / (gamma - 1.0))
