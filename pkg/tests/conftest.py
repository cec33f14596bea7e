"""
Shared fixtures for the test suite.
"""

import logging

import numpy as np
import pytest

from src.config import reset_config
from src.data import write_npy
from src.utils.logger import PACKAGE_LOGGER, Logger


@pytest.fixture(autouse=True)
def clean_state():
    """Fresh configuration singleton and logging handlers for every test."""
    reset_config()
    yield
    reset_config()
    root = logging.getLogger(PACKAGE_LOGGER)
    for handler in list(root.handlers):
        root.removeHandler(handler)
    Logger._configured = False


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def output_dir(tmp_path):
    path = tmp_path / "out"
    path.mkdir()
    return path


@pytest.fixture
def identical_features_npy(tmp_path):
    """B x D activations whose D channels are all the same vector."""
    column = np.random.default_rng(3).normal(size=(16, 1))
    return write_npy(tmp_path / "identical.npy", np.tile(column, (1, 6)))


@pytest.fixture
def layer_npys(tmp_path):
    """Three BD activation dumps of a random tanh stack (B=64, D=24)."""
    gen = np.random.default_rng(7)
    h = gen.normal(size=(64, 24))
    paths = []
    for index in range(3):
        h = np.tanh(h @ gen.normal(0.0, 1.0 / np.sqrt(24), size=(24, 24)))
        paths.append(write_npy(tmp_path / f"layer{index}.npy", h))
    return paths
