"""
Finite-difference checks of the analytic gradients.

check_total_loss_grad perturbs every parameter of a small tanh network and
compares central differences of the penalized loss with backprop.
run_gradcheck bundles it with the distance-matrix check for the CLI.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from src.featnet import distance_matrix, to_feature_matrix
from src.fractal import (
    SMOOTH,
    GradCheckResult,
    SmoothingParams,
    box_curve,
    check_ss_rate_grad,
    data_grid,
    max_relative_error,
    ss_rate,
)
from src.trainer.config import TrainConfig
from src.trainer.loss import task_loss, total_loss
from src.trainer.mlp import TANH, MlpModel, forward, init_mlp

logger = logging.getLogger(__name__)

GRADCHECK_WIDTHS = (2, 16, 16, 3)
GRADCHECK_BATCH = 8
PARAM_FLOOR = 1e-6
# Entries smaller than this share of the largest numeric gradient are
# compared against that scale instead of their own magnitude.
PARAM_RELATIVE_FLOOR = 1e-3
SS_SEEDS = 5


def penalized_loss_value(m: MlpModel, batch: np.ndarray, labels: np.ndarray,
                         cfg: TrainConfig, k: int) -> float:
    """Value of task loss + alpha * (SS_rate_smooth(layer k) - gamma_k)^2."""
    cache = forward(m, batch)
    loss, _ = task_loss(cache.logits, labels)
    if cfg.alpha == 0.0:
        return loss
    c = distance_matrix(to_feature_matrix(cache.hidden[k]))
    if c.max_off_diagonal() <= 0.0:
        return loss
    value = ss_rate(box_curve(c, data_grid(c, cfg.grid_count), SMOOTH, cfg.smoothing), cfg.normalizer_mode).value
    return loss + cfg.alpha * (value - cfg.gamma_for(k, m.n_hidden)) ** 2


def check_total_loss_grad(seed: int, widths: Sequence[int] = GRADCHECK_WIDTHS,
                          batch_size: int = GRADCHECK_BATCH, alpha: float = 1.0,
                          k_smooth: float = 50.0, h: float = 1e-4,
                          tolerance: float = 1e-3) -> GradCheckResult:
    """
    Central differences over all parameters, for every hidden layer as the
    penalized one.

    Args:
        seed: Seeds the model, the batch and the labels
        widths: Layer widths
        batch_size: Rows in the batch
        alpha: Penalty weight
        k_smooth: Sigmoid smoothing factor
        h: Finite-difference step
        tolerance: Largest accepted relative error

    Returns:
        GradCheckResult
    """
    rng = np.random.default_rng(seed)
    model = init_mlp(widths, TANH, rng=rng)
    batch = rng.normal(size=(batch_size, widths[0]))
    labels = rng.integers(widths[-1], size=batch_size)
    cfg = TrainConfig(alpha=alpha, penalty_fac=1.0, gamma_target=0.0,
                      smoothing=SmoothingParams(k=k_smooth, fac=1.0))

    worst, checked = 0.0, 0
    for k in range(model.n_hidden):
        analytic = np.concatenate([g.ravel() for g in total_loss(model, batch, labels, cfg, None, k=k).grads])
        numeric: List[float] = []
        for param in model.parameters():
            flat = param.reshape(-1)
            for index in range(flat.size):
                saved = flat[index]
                flat[index] = saved + h
                plus = penalized_loss_value(model, batch, labels, cfg, k)
                flat[index] = saved - h
                minus = penalized_loss_value(model, batch, labels, cfg, k)
                flat[index] = saved
                numeric.append((plus - minus) / (2.0 * h))
        numeric_array = np.asarray(numeric)
        floor = max(PARAM_FLOOR, PARAM_RELATIVE_FLOOR * float(np.abs(numeric_array).max()))
        error, count = max_relative_error(analytic, numeric_array, floor)
        worst, checked = max(worst, error), checked + count
    return GradCheckResult(worst, checked, tolerance)


@dataclass(frozen=True)
class GradcheckReport:
    seed: int
    distance: List[GradCheckResult]
    parameters: GradCheckResult

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.distance) and self.parameters.passed

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "distance_max_relative_error": max(r.max_relative_error for r in self.distance),
            "distance_tolerance": self.distance[0].tolerance,
            "distance_checks": [
                {"seed": self.seed + i, "max_relative_error": r.max_relative_error, "checked": r.checked}
                for i, r in enumerate(self.distance)
            ],
            "parameter_max_relative_error": self.parameters.max_relative_error,
            "parameter_tolerance": self.parameters.tolerance,
            "parameter_checked": self.parameters.checked,
        }


def run_gradcheck(seed: int) -> GradcheckReport:
    """dSS/dC on five random distance matrices plus the end-to-end parameter check."""
    distance = [check_ss_rate_grad(seed + i) for i in range(SS_SEEDS)]
    for i, result in enumerate(distance):
        logger.info(f"dSS/dC check seed {seed + i}: max relative error {result.max_relative_error:.3e}")
    parameters = check_total_loss_grad(seed)
    logger.info(f"Parameter check seed {seed}: max relative error {parameters.max_relative_error:.3e}")
    return GradcheckReport(seed, distance, parameters)
