"""
File management utilities for the analysis pipeline.
"""

import json
import os
import sys
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Any, Optional

import numpy as np

from src.utils.errors import ValidationError


def _json_default(value):
    """Convert numpy scalars and arrays for json.dump."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


class FileManager:
    """Handles file and directory operations for the pipeline."""

    @staticmethod
    def ensure_directory(directory_path) -> Path:
        """
        Ensure directory exists, create if it doesn't.

        Args:
            directory_path: Path to directory

        Returns:
            Path: The directory path
        """
        path = Path(directory_path)
        path.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def atomic_write_bytes(path, payload: bytes) -> Path:
        """
        Write bytes to a temporary file next to `path`, then rename over it.

        Args:
            path: Destination file
            payload: Bytes to write

        Returns:
            Path: The destination path
        """
        path = Path(path)
        FileManager.ensure_directory(path.parent if str(path.parent) else ".")
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(payload)
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
        return path

    @staticmethod
    def atomic_write_text(path, text: str) -> Path:
        """Atomically write UTF-8 text (newline-normalized to '\\n')."""
        return FileManager.atomic_write_bytes(path, text.encode("utf-8"))

    @staticmethod
    def to_json(data: Any) -> str:
        """
        Render data as indented JSON.

        Floats are written with repr(), i.e. the shortest decimal that
        round-trips to the same binary64 value.
        """
        return json.dumps(data, indent=2, default=_json_default, allow_nan=False) + "\n"

    @staticmethod
    def write_json(path, data: Any) -> Path:
        """Atomically write a JSON document."""
        return FileManager.atomic_write_text(path, FileManager.to_json(data))

    @staticmethod
    def read_json(path) -> Any:
        """Read a JSON document."""
        path = Path(path)
        if not path.is_file():
            raise ValidationError(f"File not found: {path}")
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)

    @staticmethod
    def write_manifest(output_dir, command: str, argv: list, config: dict, seed: Optional[int]) -> Path:
        """
        Write manifest.json capturing everything needed to re-run a command.

        Args:
            output_dir: Directory receiving the manifest
            command: Subcommand name
            argv: Raw argument vector
            config: Fully resolved configuration
            seed: Run seed

        Returns:
            Path: Manifest path
        """
        from src import __version__

        manifest = {
            "command": command,
            "argv": list(argv),
            "seed": seed,
            "version": __version__,
            "python": sys.version.split()[0],
            "config": config,
            "timestamp": datetime.now().isoformat(timespec="seconds"),
        }
        return FileManager.write_json(Path(output_dir) / "manifest.json", manifest)
