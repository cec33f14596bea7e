"""
Training loop, gamma calibration and the constrained-vs-baseline comparison.
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.data.tables import Dataset
from src.featnet import distance_matrix, to_feature_matrix
from src.fractal import HARD, MODES, box_curve, data_grid, ss_rate
from src.trainer.config import TrainConfig
from src.trainer.loss import total_loss
from src.trainer.mlp import MlpModel, accuracy, forward, init_mlp
from src.utils.errors import TrainingDivergedError, ValidationError
from src.utils.file_manager import FileManager

logger = logging.getLogger(__name__)

LOG_COLUMNS = (
    "epoch", "task_loss", "total_loss", "train_acc", "val_acc",
    "k", "ss_rate_smooth", "ss_rate_hard",
)


class RngStreams(NamedTuple):
    init: np.random.Generator
    shuffle: np.random.Generator
    layer_sampling: np.random.Generator
    split: np.random.Generator


def rng_streams(seed: int) -> RngStreams:
    """Independent generators for each consumer, spawned in a fixed order."""
    children = np.random.SeedSequence(seed).spawn(len(RngStreams._fields))
    return RngStreams(*(np.random.default_rng(child) for child in children))


class SgdMomentum:
    """v = mu * v + g; theta -= lr * v."""

    def __init__(self, lr: float, momentum: float, clip_norm: Optional[float] = None):
        self.lr = lr
        self.momentum = momentum
        self.clip_norm = clip_norm
        self.velocity: Optional[List[np.ndarray]] = None

    def step(self, m: MlpModel, grads: List[np.ndarray]):
        if self.clip_norm is not None:
            norm = float(np.sqrt(sum(float(np.sum(g ** 2)) for g in grads)))
            if norm > self.clip_norm:
                grads = [g * (self.clip_norm / norm) for g in grads]
        if self.velocity is None:
            self.velocity = [np.zeros_like(g) for g in grads]
        for param, vel, grad in zip(m.parameters(), self.velocity, grads):
            vel *= self.momentum
            vel += grad
            param -= self.lr * vel


@dataclass
class TrainLog:
    """
    One row per epoch.

    Losses are means over the epoch's steps and accuracies are measured
    after its last step. k and ss_rate_smooth are the last step's values,
    not epoch means; ss_rate_hard is layer k on the fixed measurement batch.
    """

    frame: pd.DataFrame

    @classmethod
    def from_rows(cls, rows: List[dict]) -> "TrainLog":
        return cls(pd.DataFrame(rows, columns=list(LOG_COLUMNS)))

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def sampled_layers(self) -> set:
        return {int(k) for k in self.frame["k"] if k >= 0}

    def records(self) -> List[dict]:
        clean = self.frame.astype(object).where(self.frame.notna(), None)
        return clean.to_dict(orient="records")

    def to_csv(self, path) -> Path:
        return FileManager.atomic_write_text(
            path, self.frame.to_csv(index=False, lineterminator="\n", float_format="%.17g")
        )

    def to_json(self, path) -> Path:
        return FileManager.write_json(path, {"epochs": self.records()})


@dataclass(frozen=True)
class TrainResult:
    model: MlpModel
    log: TrainLog
    profile_before: "LayerProfile"
    profile_after: "LayerProfile"


@dataclass(frozen=True)
class LayerProfile:
    """SS_rate of every hidden layer on one measurement batch."""

    values: Tuple[float, ...]
    mode: str
    mean: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "mean", float(np.mean(self.values)) if self.values else float("nan"))

    def to_dict(self) -> dict:
        return {"mode": self.mode, "per_layer": list(self.values), "mean": self.mean}


def hidden_ss_rate(hidden: np.ndarray, mode: str, cfg: TrainConfig) -> float:
    """SS_rate of one B x D hidden output on its data grid."""
    c = distance_matrix(to_feature_matrix(hidden))
    curve = box_curve(c, data_grid(c, cfg.grid_count), mode, cfg.smoothing)
    return ss_rate(curve, cfg.normalizer_mode).value


def layer_profile(m: MlpModel, batch: np.ndarray, mode: str = HARD,
                  cfg: Optional[TrainConfig] = None) -> LayerProfile:
    """
    SS_rate of each hidden layer's feature network on a measurement batch.

    Args:
        m: Model
        batch: Measurement inputs (B x in)
        mode: "hard" or "smooth"
        cfg: Grid, smoothing and normalizer settings

    Returns:
        LayerProfile
    """
    if mode not in MODES:
        raise ValidationError(f"Unknown mode '{mode}'")
    cfg = cfg or TrainConfig()
    cache = forward(m, batch)
    return LayerProfile(tuple(hidden_ss_rate(h, mode, cfg) for h in cache.hidden), mode)


def mean_gap(profile: LayerProfile, gamma: np.ndarray) -> float:
    """Mean |SS_rate(layer) - gamma(layer)|."""
    return float(np.mean(np.abs(np.asarray(profile.values) - gamma)))


def train(m: MlpModel, train_data: Dataset, cfg: TrainConfig,
          val_data: Optional[Dataset] = None,
          streams: Optional[RngStreams] = None) -> TrainResult:
    """
    Minibatch SGD with momentum on the task loss plus the SS_rate penalty.

    Batches are shuffled from the shuffle stream and the penalized layer is
    drawn from the layer-sampling stream, so alpha = 0 consumes the same
    batch order as task-only training. The input model is not modified.

    Args:
        m: Initial model
        train_data: Training set
        cfg: Hyperparameters
        val_data: Optional validation set
        streams: Random streams (defaults to rng_streams(cfg.seed))

    Returns:
        TrainResult: final model, per-epoch log, hard profiles before and after
    """
    if len(train_data) < 2:
        raise ValidationError("Training needs at least 2 samples")
    if train_data.features != m.widths[0]:
        raise ValidationError(f"Data has {train_data.features} features, model expects {m.widths[0]}")
    if train_data.classes > m.widths[-1]:
        raise ValidationError(f"Data has {train_data.classes} classes, model outputs {m.widths[-1]}")
    if cfg.alpha > 0:
        cfg.gamma_vector(m.n_hidden)

    streams = streams or rng_streams(cfg.seed)
    model = m.copy()
    optimizer = SgdMomentum(cfg.lr, cfg.momentum, cfg.clip_norm)
    measure = train_data.head(cfg.eval_size).x
    profile_before = layer_profile(model, measure, HARD, cfg)
    logger.info(f"Hard SS_rate before training: {profile_before.mean:.4f} (mean over hidden layers)")

    rows: List[dict] = []
    n = len(train_data)
    for epoch in tqdm(range(cfg.epochs), desc="Epochs", disable=not cfg.show_progress):
        order = streams.shuffle.permutation(n)
        task_sum = total_sum = 0.0
        steps = 0
        k, last_ss = -1, None
        for start in range(0, n, cfg.batch_size):
            index = order[start:start + cfg.batch_size]
            step = total_loss(model, train_data.x[index], train_data.y[index], cfg, streams.layer_sampling)
            finite = np.isfinite(step.total) and all(np.all(np.isfinite(g)) for g in step.grads)
            if not finite:
                log = TrainLog.from_rows(rows)
                raise TrainingDivergedError(
                    f"Non-finite loss at epoch {epoch}, step {steps}", model=model.copy(), log=log
                )
            optimizer.step(model, step.grads)
            task_sum += step.task
            total_sum += step.total
            steps += 1
            k, last_ss = step.k, step.ss_rate

        rows.append({
            "epoch": epoch,
            "task_loss": task_sum / steps,
            "total_loss": total_sum / steps,
            "train_acc": accuracy(model, train_data.x, train_data.y),
            "val_acc": accuracy(model, val_data.x, val_data.y) if val_data is not None and len(val_data) else None,
            "k": k,
            "ss_rate_smooth": last_ss,
            "ss_rate_hard": (hidden_ss_rate(forward(model, measure).hidden[k], HARD, cfg) if k >= 0 else None),
        })

    log = TrainLog.from_rows(rows)
    profile_after = layer_profile(model, measure, HARD, cfg)
    logger.info(
        f"Finished {cfg.epochs} epochs: train accuracy {rows[-1]['train_acc']:.4f}, "
        f"hard SS_rate {profile_after.mean:.4f}"
    )
    return TrainResult(model, log, profile_before, profile_after)


@dataclass(frozen=True)
class Calibration:
    gamma: Tuple[float, ...]
    result: TrainResult


def calibrate_gamma(m_init: MlpModel, train_data: Dataset, cfg: TrainConfig,
                    streams: Optional[RngStreams] = None) -> Calibration:
    """
    Train without the penalty, then measure hard SS_rate per hidden layer.

    The measurement batch is the first eval_size training points.

    Returns:
        Calibration: gamma (one value per hidden layer) and the training run
    """
    if cfg.alpha != 0:
        raise ValidationError(f"Calibration trains without the penalty; got alpha={cfg.alpha}")
    if m_init.n_hidden < 1:
        raise ValidationError("Calibration needs at least one hidden layer")
    result = train(m_init, train_data, cfg, streams=streams)
    return Calibration(gamma=result.profile_after.values, result=result)


@dataclass(frozen=True)
class RunSummary:
    seed: int
    train_acc: float
    val_acc: Optional[float]
    gap: float
    profile: LayerProfile


def _summary(seed: int, result: TrainResult, gamma: np.ndarray) -> RunSummary:
    last = result.log.frame.iloc[-1]
    val = last["val_acc"]
    return RunSummary(
        seed=seed,
        train_acc=float(last["train_acc"]),
        val_acc=None if pd.isna(val) else float(val),
        gap=mean_gap(result.profile_after, gamma),
        profile=result.profile_after,
    )


def _aggregate(runs: List[RunSummary]) -> dict:
    def stats(values):
        values = np.asarray([v for v in values if v is not None], dtype=np.float64)
        if not values.size:
            return {"mean": None, "std": None}
        return {"mean": float(values.mean()), "std": float(values.std())}

    return {
        "runs": [
            {"seed": r.seed, "train_acc": r.train_acc, "val_acc": r.val_acc, "gap": r.gap,
             "ss_rate_hard": list(r.profile.values)}
            for r in runs
        ],
        "train_acc": stats([r.train_acc for r in runs]),
        "val_acc": stats([r.val_acc for r in runs]),
        "gap": stats([r.gap for r in runs]),
    }


@dataclass(frozen=True)
class ComparisonReport:
    gamma: Tuple[float, ...]
    baseline: List[RunSummary]
    constrained: List[RunSummary]
    alpha: float
    penalty_fac: float

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "penalty_fac": self.penalty_fac,
            "gamma": list(self.gamma),
            "baseline": _aggregate(self.baseline),
            "constrained": _aggregate(self.constrained),
        }


def compare_constrained(widths, activation: str, train_data: Dataset, cfg: TrainConfig,
                        repeats: int = 1, val_data: Optional[Dataset] = None,
                        calibration_seed: Optional[int] = None) -> ComparisonReport:
    """
    Baseline (alpha = 0) against penalized training over several seeds.

    gamma is calibrated once from an unpenalized run on calibration_seed
    (default: cfg.seed + repeats, disjoint from the compared seeds). Both arms
    of repeat r start from the same initialization, seeded cfg.seed + r.

    Args:
        widths: Layer widths
        activation: "relu" or "tanh"
        train_data: Training set
        cfg: Hyperparameters of the penalized arm (alpha > 0)
        repeats: Number of seeds
        val_data: Optional validation set
        calibration_seed: Seed of the calibration run

    Returns:
        ComparisonReport
    """
    if cfg.alpha <= 0:
        raise ValidationError("The constrained arm needs alpha > 0")
    if repeats < 1:
        raise ValidationError(f"repeats must be >= 1, got {repeats}")
    calibration_seed = cfg.seed + repeats if calibration_seed is None else calibration_seed
    calib_cfg = replace(cfg, alpha=0.0, seed=calibration_seed)
    calib_streams = rng_streams(calibration_seed)
    calibration = calibrate_gamma(
        init_mlp(widths, activation, rng=calib_streams.init), train_data, calib_cfg, calib_streams
    )
    gamma = np.asarray(calibration.gamma)
    logger.info(f"Calibrated gamma: {[round(g, 4) for g in calibration.gamma]}")

    baseline, constrained = [], []
    for r in range(repeats):
        seed = cfg.seed + r
        for alpha, bucket in ((0.0, baseline), (cfg.alpha, constrained)):
            run_cfg = replace(cfg, seed=seed, alpha=alpha, gamma_target=calibration.gamma)
            streams = rng_streams(seed)
            model = init_mlp(widths, activation, rng=streams.init)
            result = train(model, train_data, run_cfg, val_data, streams)
            bucket.append(_summary(seed, result, gamma))
    return ComparisonReport(calibration.gamma, baseline, constrained, cfg.alpha, cfg.penalty_fac)
