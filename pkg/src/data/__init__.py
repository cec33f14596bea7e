"""
File formats (NPY, CSV) and synthetic data generators.
"""

from src.data.generators import (
    GRAPH_KINDS,
    POINT_KINDS,
    cantor_sample,
    random_connected_graph,
    synth_blobs,
    synth_graph,
    synth_points,
)
from src.data.npy import read_npy, read_tensor, write_npy
from src.data.tables import (
    Dataset,
    read_dataset_csv,
    read_matrix_csv,
    split_dataset,
    write_dataset_csv,
    write_matrix_csv,
)

__all__ = [
    "GRAPH_KINDS",
    "POINT_KINDS",
    "Dataset",
    "cantor_sample",
    "random_connected_graph",
    "read_dataset_csv",
    "read_matrix_csv",
    "read_npy",
    "read_tensor",
    "split_dataset",
    "synth_blobs",
    "synth_graph",
    "synth_points",
    "write_dataset_csv",
    "write_matrix_csv",
    "write_npy",
]
