"""
Training hyperparameters.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from src.fractal import BOUNDED, DEFAULT_GRID_COUNT, NORMALIZER_MODES, SmoothingParams
from src.utils.errors import ValidationError

# Multiplies the penalty gradient only; the reported penalty value stays alpha * gap^2.
DEFAULT_PENALTY_FAC = 1e4


@dataclass(frozen=True)
class TrainConfig:
    """
    Hyperparameters of one training run.

    gamma_target is either a scalar (broadcast to every hidden layer) or
    one value per hidden layer. penalty_fac scales the gradient of the
    SS_rate penalty, so alpha * penalty_fac sets how hard training pulls
    each layer toward its target.
    """

    alpha: float = 0.0
    penalty_fac: float = DEFAULT_PENALTY_FAC
    gamma_target: Union[float, Tuple[float, ...]] = 0.0
    lr: float = 0.05
    momentum: float = 0.9
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    smoothing: SmoothingParams = field(default_factory=SmoothingParams)
    grid_count: int = DEFAULT_GRID_COUNT
    normalizer_mode: str = BOUNDED
    clip_norm: Optional[float] = None
    eval_size: int = 256
    show_progress: bool = False

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha < 0:
            raise ValidationError(f"alpha must be finite and >= 0, got {self.alpha}")
        if not np.isfinite(self.penalty_fac) or self.penalty_fac <= 0:
            raise ValidationError(f"penalty_fac must be finite and > 0, got {self.penalty_fac}")
        if not np.isfinite(self.lr) or self.lr <= 0:
            raise ValidationError(f"lr must be > 0, got {self.lr}")
        if not 0 <= self.momentum < 1:
            raise ValidationError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 2:
            raise ValidationError(f"batch_size must be >= 2, got {self.batch_size}")
        if self.eval_size < 2:
            raise ValidationError(f"eval_size must be >= 2, got {self.eval_size}")
        if self.normalizer_mode not in NORMALIZER_MODES:
            raise ValidationError(f"Unknown normalizer mode '{self.normalizer_mode}'")
        if self.clip_norm is not None and self.clip_norm <= 0:
            raise ValidationError(f"clip_norm must be > 0 when set, got {self.clip_norm}")
        if isinstance(self.gamma_target, Sequence):
            object.__setattr__(self, "gamma_target", tuple(float(g) for g in self.gamma_target))
        gammas = np.atleast_1d(np.asarray(self.gamma_target, dtype=np.float64))
        if not np.all(np.isfinite(gammas)):
            raise ValidationError("gamma_target must be finite")

    def gamma_for(self, k: int, n_hidden: int) -> float:
        """Target of hidden layer k."""
        if isinstance(self.gamma_target, tuple):
            if len(self.gamma_target) != n_hidden:
                raise ValidationError(
                    f"gamma_target has {len(self.gamma_target)} values for {n_hidden} hidden layers"
                )
            return self.gamma_target[k]
        return float(self.gamma_target)

    def gamma_vector(self, n_hidden: int) -> np.ndarray:
        return np.array([self.gamma_for(k, n_hidden) for k in range(n_hidden)])
