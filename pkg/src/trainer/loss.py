"""
Task loss, self-similarity penalty and their combined gradients.

    L_total = L_task + alpha * (SS_rate_smooth(layer k) - gamma_k)^2

with k drawn uniformly over hidden layers at every step.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from src.featnet import distance_backward, distance_matrix, to_feature_matrix
from src.fractal import ss_rate_value_and_grad
from src.trainer.config import TrainConfig
from src.trainer.mlp import MlpModel, backward, forward
from src.utils.errors import ValidationError

logger = logging.getLogger(__name__)


def task_loss(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Mean softmax cross-entropy and its gradient (softmax - onehot) / B.

    Args:
        logits: B x C
        labels: B integer class ids in [0, C)

    Returns:
        tuple: (loss, B x C gradient)
    """
    labels = np.asarray(labels)
    batch, classes = logits.shape
    if labels.shape != (batch,) or np.any(labels < 0) or np.any(labels >= classes):
        raise ValidationError(f"Labels must be {batch} class ids in [0, {classes})")
    log_probs = log_softmax(logits, axis=1)
    rows = np.arange(batch)
    loss = float(-log_probs[rows, labels].mean())
    grad = softmax(logits, axis=1)
    grad[rows, labels] -= 1.0
    return loss, grad / batch


@dataclass(frozen=True)
class PenaltyTerm:
    value: float
    ss_rate: float
    hidden_grad: Optional[np.ndarray]


def ss_penalty(hidden: np.ndarray, gamma: float, cfg: TrainConfig) -> Optional[PenaltyTerm]:
    """
    alpha * (SS_rate_smooth - gamma)^2 of one hidden layer and its scaled gradient.

    The gradient with respect to H is multiplied by cfg.penalty_fac; the
    value is not. The threshold grid is rebuilt from this batch's distances.
    Returns None when every node carries the same features (all distances zero).

    Args:
        hidden: B x D post-activation output of the sampled layer
        gamma: Target for that layer
        cfg: Training configuration

    Returns:
        PenaltyTerm or None
    """
    f = to_feature_matrix(hidden)
    c = distance_matrix(f)
    if c.max_off_diagonal() <= 0.0:
        return None
    result, pair_grad = ss_rate_value_and_grad(c, cfg.grid_count, cfg.smoothing, cfg.normalizer_mode)
    gap = result.value - gamma
    upstream = 2.0 * cfg.alpha * cfg.penalty_fac * gap
    dfeatures = distance_backward(f, c, upstream * pair_grad)
    return PenaltyTerm(value=cfg.alpha * gap ** 2, ss_rate=result.value, hidden_grad=dfeatures.T)


@dataclass(frozen=True)
class StepResult:
    """Losses and parameter gradients of one minibatch."""

    task: float
    penalty: float
    total: float
    grads: List[np.ndarray]
    k: int
    ss_rate: Optional[float]
    logits: np.ndarray


def total_loss(m: MlpModel, batch: np.ndarray, labels: np.ndarray, cfg: TrainConfig,
               rng: Optional[np.random.Generator], k: Optional[int] = None) -> StepResult:
    """
    Task loss plus the penalty on one uniformly sampled hidden layer.

    Args:
        m: Model
        batch: B x in inputs
        labels: B labels
        cfg: Training configuration
        rng: Layer-sampling stream (one draw per call)
        k: Use this hidden layer instead of sampling

    Returns:
        StepResult
    """
    cache = forward(m, batch)
    task, dlogits = task_loss(cache.logits, labels)
    if k is None:
        k = int(rng.integers(m.n_hidden)) if m.n_hidden else -1
    if cfg.alpha == 0.0 or k < 0:
        return StepResult(task, 0.0, task, backward(m, cache, dlogits), k, None, cache.logits)

    term = ss_penalty(cache.hidden[k], cfg.gamma_for(k, m.n_hidden), cfg)
    if term is None:
        logger.info(f"Hidden layer {k} is degenerate (all distances zero); penalty skipped")
        return StepResult(task, 0.0, task, backward(m, cache, dlogits), k, None, cache.logits)
    grads = backward(m, cache, dlogits, {k: term.hidden_grad})
    return StepResult(task, term.value, task + term.value, grads, k, term.ss_rate, cache.logits)
