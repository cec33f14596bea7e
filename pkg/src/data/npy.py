"""
NPY v1.0 reader/writer restricted to C-order little-endian float32/float64.
"""

import io
from pathlib import Path
from typing import Optional

import numpy as np
from numpy.lib import format as npy_format

from src.featnet import HiddenTensor
from src.utils.errors import NpyFormatError, ValidationError
from src.utils.file_manager import FileManager

SUPPORTED_DTYPES = ("<f4", "<f8")
SUPPORTED_VERSION = (1, 0)


def read_npy(path) -> np.ndarray:
    """
    Read an NPY file.

    Args:
        path: File path

    Returns:
        np.ndarray: The stored array, in its stored dtype

    Raises:
        NpyFormatError: wrong magic, unsupported version, fortran order,
            unsupported dtype or a payload that does not match the header
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"File not found: {path}")
    raw = path.read_bytes()
    stream = io.BytesIO(raw)
    try:
        version = npy_format.read_magic(stream)
    except ValueError as e:
        raise NpyFormatError(f"{path}: not an NPY file ({e})") from e
    if version != SUPPORTED_VERSION:
        raise NpyFormatError(f"{path}: unsupported version {version[0]}.{version[1]} (only 1.0)")
    try:
        shape, fortran_order, dtype = npy_format.read_array_header_1_0(stream)
    except ValueError as e:
        raise NpyFormatError(f"{path}: malformed header ({e})") from e
    if fortran_order:
        raise NpyFormatError(f"{path}: fortran-order arrays are not supported")
    if dtype.str not in SUPPORTED_DTYPES:
        raise NpyFormatError(f"{path}: unsupported dtype {dtype.str} (expected {' or '.join(SUPPORTED_DTYPES)})")

    expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    payload = raw[stream.tell():]
    if len(payload) != expected:
        raise NpyFormatError(
            f"{path}: truncated payload (header declares {expected} bytes, file holds {len(payload)})"
        )
    return np.frombuffer(payload, dtype=dtype).reshape(shape).copy()


def write_npy(path, array: np.ndarray) -> Path:
    """Write a float32/float64 array as NPY v1.0, C order, little-endian."""
    array = np.asarray(array)
    if array.dtype.kind != "f" or array.dtype.itemsize not in (4, 8):
        raise ValidationError(f"Only float32/float64 arrays can be written, got {array.dtype}")
    array = np.ascontiguousarray(array.astype(array.dtype.newbyteorder("<"), copy=False))
    buffer = io.BytesIO()
    npy_format.write_array(buffer, array, version=SUPPORTED_VERSION, allow_pickle=False)
    return FileManager.atomic_write_bytes(path, buffer.getvalue())


def read_tensor(path, layout: Optional[str] = None) -> HiddenTensor:
    """
    Read an NPY activation dump as a hidden tensor.

    Without an explicit layout, 2-D arrays are BD and 4-D arrays BDHW;
    3-D arrays are ambiguous and need one.
    """
    values = read_npy(path)
    if layout is None:
        guesses = {2: "BD", 4: "BDHW"}
        if values.ndim not in guesses:
            raise ValidationError(f"{path}: cannot infer the layout of a {values.ndim}-D array; pass --layout")
        layout = guesses[values.ndim]
    return HiddenTensor(values.astype(np.float64), layout)
