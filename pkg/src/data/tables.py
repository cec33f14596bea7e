"""
Tabular datasets and matrices stored as CSV.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd

from src.utils.errors import ValidationError
from src.utils.file_manager import FileManager

LABEL_COLUMN = "label"


@dataclass(frozen=True)
class Dataset:
    """Feature rows x (n x f) with integer labels y."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise ValidationError(f"Dataset needs x (n x f) and y (n,), got {x.shape} and {y.shape}")
        if not np.all(np.isfinite(x)):
            raise ValidationError("Dataset features must be finite")
        if y.size and (np.any(np.mod(y, 1) != 0) or np.any(y < 0)):
            raise ValidationError("Labels must be non-negative integers")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y.astype(np.int64))

    def __len__(self) -> int:
        return int(self.x.shape[0])

    @property
    def features(self) -> int:
        return int(self.x.shape[1])

    @property
    def classes(self) -> int:
        return int(self.y.max()) + 1 if len(self) else 0

    def head(self, n: int) -> "Dataset":
        return Dataset(self.x[:n], self.y[:n])

    def take(self, index: np.ndarray) -> "Dataset":
        return Dataset(self.x[index], self.y[index])


def split_dataset(data: Dataset, val_fraction: float,
                  rng: np.random.Generator) -> Tuple[Dataset, Dataset]:
    """
    Shuffle once and cut off a validation tail.

    Args:
        data: Full dataset
        val_fraction: Share of rows held out, in [0, 1)
        rng: Split stream

    Returns:
        tuple: (train, validation)
    """
    if not 0 <= val_fraction < 1:
        raise ValidationError(f"val_fraction must be in [0, 1), got {val_fraction}")
    order = rng.permutation(len(data))
    n_val = int(round(val_fraction * len(data)))
    return data.take(order[n_val:]), data.take(order[:n_val])


def read_dataset_csv(path, label_column: str = LABEL_COLUMN) -> Dataset:
    """
    Read a CSV with a header row: numeric feature columns plus a label column.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"Dataset file not found: {path}")
    frame = pd.read_csv(path, float_precision="round_trip")
    if label_column not in frame.columns:
        raise ValidationError(f"Dataset {path} has no '{label_column}' column")
    features = frame.drop(columns=[label_column])
    non_numeric = [c for c in features.columns if not pd.api.types.is_numeric_dtype(features[c])]
    if non_numeric:
        raise ValidationError(f"Non-numeric feature columns in {path}: {non_numeric}")
    return Dataset(features.to_numpy(dtype=np.float64), frame[label_column].to_numpy())


def write_dataset_csv(data: Dataset, path, label_column: str = LABEL_COLUMN) -> Path:
    """Write features as x0, x1, ... followed by the label column."""
    frame = pd.DataFrame(data.x, columns=[f"x{i}" for i in range(data.features)])
    frame[label_column] = data.y
    return FileManager.atomic_write_text(path, frame.to_csv(index=False, lineterminator="\n", float_format="%.17g"))


def read_matrix_csv(path) -> np.ndarray:
    """Read a headerless numeric matrix (for example a distance matrix)."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"Matrix file not found: {path}")
    frame = pd.read_csv(path, header=None, float_precision="round_trip")
    try:
        matrix = frame.to_numpy(dtype=np.float64)
    except ValueError as e:
        raise ValidationError(f"Matrix file {path} is not numeric: {e}") from e
    if matrix.ndim != 2:
        raise ValidationError(f"Matrix file {path} is not 2-D")
    return matrix


def write_matrix_csv(matrix: np.ndarray, path) -> Path:
    """Write a headerless matrix with round-trip float precision."""
    frame = pd.DataFrame(np.asarray(matrix, dtype=np.float64))
    return FileManager.atomic_write_text(
        path, frame.to_csv(index=False, header=False, lineterminator="\n", float_format="%.17g")
    )
