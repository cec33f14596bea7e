"""
Fully connected network with manual forward and backward passes.

Weights are stored (in, out) so a batch X (B x in) maps to X @ W + b.
Hidden layers are cached after their activation; those post-activation
outputs are the layers whose feature networks get measured and penalized.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.utils.errors import ValidationError

RELU = "relu"
TANH = "tanh"
ACTIVATIONS = (RELU, TANH)


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == RELU:
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _activation_grad(z: np.ndarray, a: np.ndarray, activation: str) -> np.ndarray:
    if activation == RELU:
        return (z > 0.0).astype(np.float64)
    return 1.0 - a ** 2


@dataclass
class MlpModel:
    """Layer widths plus one (W, b) pair per layer."""

    widths: Tuple[int, ...]
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    activation: str = RELU

    def __post_init__(self):
        self.widths = tuple(int(w) for w in self.widths)
        if len(self.widths) < 2 or min(self.widths) < 1:
            raise ValidationError(f"Need at least input and output widths >= 1, got {self.widths}")
        if self.activation not in ACTIVATIONS:
            raise ValidationError(f"Unknown activation '{self.activation}' (expected one of {ACTIVATIONS})")
        if len(self.weights) != len(self.widths) - 1 or len(self.biases) != len(self.weights):
            raise ValidationError("One weight matrix and one bias vector per layer are required")
        for index, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (self.widths[index], self.widths[index + 1])
            if w.shape != expected or b.shape != (expected[1],):
                raise ValidationError(
                    f"Layer {index}: expected W{expected} and b({expected[1]},), got W{w.shape} and b{b.shape}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValidationError(f"Layer {index} has non-finite parameters")

    @property
    def n_hidden(self) -> int:
        return len(self.widths) - 2

    def parameters(self) -> List[np.ndarray]:
        """Parameters in checkpoint order: W0, b0, W1, b1, ..."""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend((w, b))
        return params

    def copy(self) -> "MlpModel":
        return MlpModel(
            self.widths,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.activation,
        )

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.parameters()])

    @classmethod
    def from_flat(cls, widths: Sequence[int], vector: np.ndarray, activation: str = RELU) -> "MlpModel":
        widths = tuple(int(w) for w in widths)
        vector = np.asarray(vector, dtype=np.float64)
        expected = sum(a * b + b for a, b in zip(widths[:-1], widths[1:]))
        if vector.size != expected:
            raise ValidationError(f"Parameter vector has {vector.size} values, widths {widths} need {expected}")
        weights, biases, offset = [], [], 0
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            weights.append(vector[offset:offset + fan_in * fan_out].reshape(fan_in, fan_out).copy())
            offset += fan_in * fan_out
            biases.append(vector[offset:offset + fan_out].copy())
            offset += fan_out
        return cls(widths, weights, biases, activation)


def init_mlp(widths: Sequence[int], activation: str = RELU,
             rng: Optional[np.random.Generator] = None, seed: int = 0) -> MlpModel:
    """
    He (relu) or Glorot-style (tanh) normal initialization with zero biases.

    Args:
        widths: Layer widths, input first and classes last
        activation: "relu" or "tanh"
        rng: Generator to draw from (defaults to default_rng(seed))
        seed: Seed when rng is not given

    Returns:
        MlpModel
    """
    rng = rng or np.random.default_rng(seed)
    widths = tuple(int(w) for w in widths)
    gain = 2.0 if activation == RELU else 1.0
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        weights.append(rng.normal(0.0, np.sqrt(gain / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(widths, weights, biases, activation)


@dataclass
class ForwardCache:
    """Everything backward needs: layer inputs and pre-activations."""

    logits: np.ndarray
    inputs: List[np.ndarray] = field(repr=False)
    pre: List[np.ndarray] = field(repr=False)

    @property
    def hidden(self) -> List[np.ndarray]:
        """Post-activation output of every hidden layer, each B x width."""
        return self.inputs[1:]


def forward(m: MlpModel, batch: np.ndarray) -> ForwardCache:
    """
    Forward pass.

    Args:
        m: Model
        batch: B x in matrix

    Returns:
        ForwardCache: logits (B x classes) and cached activations
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != m.widths[0]:
        raise ValidationError(f"Batch must be B x {m.widths[0]}, got shape {x.shape}")
    inputs, pre = [x], []
    last = len(m.weights) - 1
    for index, (w, b) in enumerate(zip(m.weights, m.biases)):
        z = inputs[-1] @ w + b
        if index == last:
            return ForwardCache(logits=z, inputs=inputs, pre=pre)
        pre.append(z)
        inputs.append(_activate(z, m.activation))
    raise AssertionError("unreachable")


def backward(m: MlpModel, cache: ForwardCache, dlogits: np.ndarray,
             hidden_grads: Optional[Dict[int, np.ndarray]] = None) -> List[np.ndarray]:
    """
    Backpropagate dL/dlogits plus optional extra gradients on hidden outputs.

    Args:
        m: Model
        cache: Result of forward on the same batch
        dlogits: B x classes
        hidden_grads: {hidden layer index: B x width gradient} added where
            that layer's output enters the chain

    Returns:
        list: Gradients in m.parameters() order
    """
    hidden_grads = hidden_grads or {}
    grads: List[np.ndarray] = [None] * (2 * len(m.weights))
    delta = dlogits
    for index in range(len(m.weights) - 1, -1, -1):
        grads[2 * index] = cache.inputs[index].T @ delta
        grads[2 * index + 1] = delta.sum(axis=0)
        if index == 0:
            break
        upstream = delta @ m.weights[index].T
        if index - 1 in hidden_grads:
            upstream = upstream + hidden_grads[index - 1]
        delta = upstream * _activation_grad(cache.pre[index - 1], cache.inputs[index], m.activation)
    return grads


def predict(m: MlpModel, x: np.ndarray) -> np.ndarray:
    """Class index with the largest logit."""
    return np.argmax(forward(m, x).logits, axis=1)


def accuracy(m: MlpModel, x: np.ndarray, y: np.ndarray) -> float:
    if len(y) == 0:
        return float("nan")
    return float(np.mean(predict(m, x) == np.asarray(y)))
