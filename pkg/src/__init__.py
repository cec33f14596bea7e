"""
Feature-network self-similarity toolkit

Builds feature networks from hidden-layer activations, measures their
self-similarity (SS_rate), checks cross-layer scale invariance, and trains
small networks with a self-similarity penalty.
"""

__version__ = "1.0.0"
