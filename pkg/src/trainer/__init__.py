"""
Small MLP trained with an optional self-similarity penalty on a randomly
sampled hidden layer.
"""

from src.trainer.checkpoint import load_checkpoint, save_checkpoint
from src.trainer.config import DEFAULT_PENALTY_FAC, TrainConfig
from src.trainer.gradcheck import GradcheckReport, check_total_loss_grad, run_gradcheck
from src.trainer.loop import (
    Calibration,
    ComparisonReport,
    LayerProfile,
    RngStreams,
    SgdMomentum,
    TrainLog,
    TrainResult,
    calibrate_gamma,
    compare_constrained,
    layer_profile,
    mean_gap,
    rng_streams,
    train,
)
from src.trainer.loss import StepResult, ss_penalty, task_loss, total_loss
from src.trainer.mlp import (
    ACTIVATIONS,
    RELU,
    TANH,
    ForwardCache,
    MlpModel,
    accuracy,
    backward,
    forward,
    init_mlp,
    predict,
)

__all__ = [
    "ACTIVATIONS",
    "RELU",
    "TANH",
    "Calibration",
    "ComparisonReport",
    "DEFAULT_PENALTY_FAC",
    "ForwardCache",
    "GradcheckReport",
    "LayerProfile",
    "MlpModel",
    "RngStreams",
    "SgdMomentum",
    "StepResult",
    "TrainConfig",
    "TrainLog",
    "TrainResult",
    "accuracy",
    "backward",
    "calibrate_gamma",
    "check_total_loss_grad",
    "compare_constrained",
    "forward",
    "init_mlp",
    "layer_profile",
    "load_checkpoint",
    "mean_gap",
    "predict",
    "rng_streams",
    "run_gradcheck",
    "save_checkpoint",
    "ss_penalty",
    "task_loss",
    "total_loss",
    "train",
]
