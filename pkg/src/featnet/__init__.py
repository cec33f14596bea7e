"""
Feature network (G_M) construction from hidden-layer activations.
"""

from src.featnet.network import (
    LAYOUTS,
    Adjacency,
    DistanceMatrix,
    FeatureMatrix,
    HiddenTensor,
    adjacency,
    distance_backward,
    distance_matrix,
    feature_network,
    permute_nodes,
    reduce_mean,
    to_feature_matrix,
)

__all__ = [
    "LAYOUTS",
    "Adjacency",
    "DistanceMatrix",
    "FeatureMatrix",
    "HiddenTensor",
    "adjacency",
    "distance_backward",
    "distance_matrix",
    "feature_network",
    "permute_nodes",
    "reduce_mean",
    "to_feature_matrix",
]
