"""
Configuration management for the feature-network analysis toolkit.
All configurable parameters are defined here as dataclass sections that can
be loaded from a TOML file and overridden from the command line.
"""

import os
import sys
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from src.fractal import BOUNDED, DEFAULT_GRID_COUNT, MODES, NORMALIZER_MODES, SmoothingParams
from src.invariance import DEFAULT_FIT_PERCENTILES, DEFAULT_FIT_POINTS, REDUCERS
from src.trainer import ACTIVATIONS, DEFAULT_PENALTY_FAC, TrainConfig
from src.utils.errors import ValidationError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass
class MetricConfig:
    """Threshold grid and SS_rate settings."""

    grid_count: int = DEFAULT_GRID_COUNT
    mode: str = "hard"
    k: float = 50.0
    fac: float = 1.0
    normalizer_mode: str = BOUNDED
    epsilon: Optional[float] = None  # adjacency threshold reported by ssrate, if set

    def smoothing(self) -> SmoothingParams:
        return SmoothingParams(k=self.k, fac=self.fac)


@dataclass
class InvarianceConfig:
    """Cross-layer invariance measurements."""

    target_dim: int = 2
    method: str = "pca"
    literal_d: bool = False
    fit_percentiles: Tuple[float, float] = DEFAULT_FIT_PERCENTILES
    fit_points: int = DEFAULT_FIT_POINTS


@dataclass
class EmbedConfig:
    dim: int = 2


@dataclass
class DataConfig:
    """Training data: built-in blobs or a CSV file."""

    source: str = "blobs"
    csv_path: Optional[str] = None
    label_column: str = "label"
    classes: int = 3
    per_class: int = 167
    dim: int = 2
    separation: float = 5.0
    val_fraction: float = 0.2


@dataclass
class TrainSection:
    """Model and optimizer settings."""

    widths: Tuple[int, ...] = (2, 16, 16, 3)
    activation: str = "relu"
    alpha: float = 0.0
    penalty_fac: float = DEFAULT_PENALTY_FAC
    gamma_target: Union[float, Tuple[float, ...]] = 0.0
    lr: float = 0.05
    momentum: float = 0.9
    epochs: int = 200
    batch_size: int = 32
    clip_norm: Optional[float] = None
    eval_size: int = 256
    repeats: int = 1


@dataclass
class RunConfig:
    """Main configuration: run-wide settings plus one section per concern."""

    # --- Run Settings ---
    seed: int = 0
    output_dir: str = field(default_factory=lambda: os.environ.get("FEATNET_OUTPUT_DIR", "runs"))
    show_progress: bool = True
    verbose: bool = False

    # --- Sections ---
    metric: MetricConfig = field(default_factory=MetricConfig)
    invariance: InvarianceConfig = field(default_factory=InvarianceConfig)
    embed: EmbedConfig = field(default_factory=EmbedConfig)
    data: DataConfig = field(default_factory=DataConfig)
    train: TrainSection = field(default_factory=TrainSection)

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def train_config(self, **changes) -> TrainConfig:
        """Trainer hyperparameters resolved from the train and metric sections."""
        section = self.train
        values = dict(
            alpha=section.alpha,
            penalty_fac=section.penalty_fac,
            gamma_target=section.gamma_target,
            lr=section.lr,
            momentum=section.momentum,
            epochs=section.epochs,
            batch_size=section.batch_size,
            seed=self.seed,
            smoothing=self.metric.smoothing(),
            grid_count=self.metric.grid_count,
            normalizer_mode=self.metric.normalizer_mode,
            clip_norm=section.clip_norm,
            eval_size=section.eval_size,
            show_progress=self.show_progress,
        )
        values.update(changes)
        return TrainConfig(**values)

    def validate(self) -> "RunConfig":
        """Check value ranges; raises ValidationError."""
        m, inv, d, t = self.metric, self.invariance, self.data, self.train
        checks = [
            (m.mode in MODES, f"metric.mode must be one of {MODES}"),
            (m.normalizer_mode in NORMALIZER_MODES, f"metric.normalizer_mode must be one of {NORMALIZER_MODES}"),
            (m.grid_count >= 8, "metric.grid_count must be >= 8"),
            (m.k > 0 and m.fac > 0, "metric.k and metric.fac must be > 0"),
            (m.epsilon is None or m.epsilon >= 0, "metric.epsilon must be >= 0"),
            (inv.method in REDUCERS, f"invariance.method must be one of {REDUCERS}"),
            (inv.target_dim >= 2, "invariance.target_dim must be >= 2"),
            (len(inv.fit_percentiles) == 2, "invariance.fit_percentiles needs two values"),
            (self.embed.dim >= 1, "embed.dim must be >= 1"),
            (d.source in ("blobs", "csv"), "data.source must be 'blobs' or 'csv'"),
            (d.source != "csv" or bool(d.csv_path), "data.csv_path is required when data.source = 'csv'"),
            (0 <= d.val_fraction < 1, "data.val_fraction must be in [0, 1)"),
            (t.activation in ACTIVATIONS, f"train.activation must be one of {ACTIVATIONS}"),
            (len(t.widths) >= 2, "train.widths needs at least input and output widths"),
            (t.repeats >= 1, "train.repeats must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ValidationError(f"Invalid configuration: {message}")
        self.train_config()
        return self


_TUPLE_FIELDS = {"widths", "fit_percentiles", "gamma_target"}


def _coerce(name: str, value: Any) -> Any:
    if name in _TUPLE_FIELDS and isinstance(value, list):
        return tuple(value)
    return value


def _apply(target: Any, values: Dict[str, Any], where: str):
    known = {f.name: f for f in fields(target)}
    for key, value in values.items():
        if key not in known:
            raise ValidationError(f"Unknown configuration key '{where}{key}'")
        current = getattr(target, key)
        if is_dataclass(current):
            if not isinstance(value, dict):
                raise ValidationError(f"Configuration section '{where}{key}' must be a table")
            _apply(current, value, f"{where}{key}.")
        elif isinstance(value, dict):
            raise ValidationError(f"Configuration key '{where}{key}' is not a section")
        else:
            setattr(target, key, _coerce(key, value))


def _nest(overrides: Dict[str, Any]) -> Dict[str, Any]:
    """{"train.alpha": 1e-4} -> {"train": {"alpha": 1e-4}}; None values are dropped."""
    nested: Dict[str, Any] = {}
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = nested
        parts = dotted.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return nested


def load_config(path: Optional[Union[str, Path]] = None,
                overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Build a RunConfig from defaults, an optional TOML file and flag overrides.

    Args:
        path: TOML file; unknown sections or keys are rejected
        overrides: Dotted keys from command-line flags (flags win)

    Returns:
        RunConfig: validated configuration
    """
    config = RunConfig()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ValidationError(f"Config file not found: {path}")
        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ValidationError(f"Invalid TOML in {path}: {e}") from e
        _apply(config, data, "")
    if overrides:
        _apply(config, _nest(overrides), "")
    return config.validate()


# Singleton instance
_config_instance = None


def get_config() -> RunConfig:
    """Get or create the singleton configuration instance."""
    global _config_instance
    if _config_instance is None:
        _config_instance = RunConfig()
    return _config_instance


def set_config(config: RunConfig) -> RunConfig:
    """Install a resolved configuration as the active one."""
    global _config_instance
    _config_instance = config
    return config


def reset_config():
    """Reset configuration instance (useful for testing)."""
    global _config_instance
    _config_instance = None
