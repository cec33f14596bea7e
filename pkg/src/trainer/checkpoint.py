"""
Model checkpoints: a flat little-endian f64 parameter vector plus a JSON
sidecar describing the layer shapes.
"""

from pathlib import Path
from typing import Tuple

import numpy as np

from src.trainer.mlp import MlpModel
from src.utils.errors import ValidationError
from src.utils.file_manager import FileManager

CHECKPOINT_FORMAT = "featnet-mlp"
CHECKPOINT_VERSION = 1


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def save_checkpoint(m: MlpModel, path) -> Tuple[Path, Path]:
    """
    Write parameters in W0, b0, W1, b1, ... order (row-major) and the sidecar.

    Returns:
        tuple: (binary path, sidecar path)
    """
    path = Path(path)
    vector = m.flat().astype("<f8")
    FileManager.atomic_write_bytes(path, vector.tobytes())
    meta = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "dtype": "<f8",
        "widths": list(m.widths),
        "activation": m.activation,
        "shapes": [list(p.shape) for p in m.parameters()],
        "count": int(vector.size),
    }
    return path, FileManager.write_json(sidecar_path(path), meta)


def load_checkpoint(path) -> MlpModel:
    """Read a checkpoint written by save_checkpoint."""
    path = Path(path)
    meta_path = sidecar_path(path)
    if not path.exists() or not meta_path.exists():
        raise ValidationError(f"Checkpoint {path} or its sidecar {meta_path} is missing")
    meta = FileManager.read_json(meta_path)
    if meta.get("format") != CHECKPOINT_FORMAT or meta.get("version") != CHECKPOINT_VERSION:
        raise ValidationError(f"Unsupported checkpoint sidecar in {meta_path}")
    payload = path.read_bytes()
    if len(payload) != 8 * int(meta["count"]):
        raise ValidationError(f"Checkpoint {path} holds {len(payload)} bytes, expected {8 * meta['count']}")
    vector = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return MlpModel.from_flat(meta["widths"], vector, meta["activation"])
