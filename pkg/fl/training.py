# fl/training.py - Local SGD, sample-weighted FedAvg aggregation, evaluation
import logging
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Protocol, Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from core.errors import DimensionMismatch, EmptyDataset
from fl.datasets import ClientDataset, LabeledDataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Flat weight vector w"""

    weights: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(weights)):
            raise ValueError("model weights must be finite")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @property
    def dimension(self) -> int:
        return self.weights.size


class Objective(Protocol):
    def loss_and_grad(self, weights: np.ndarray, features: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
        ...

    def predict(self, weights: np.ndarray, features: np.ndarray) -> np.ndarray:
        ...


class SoftmaxRegression:
    """Multinomial logistic regression, optionally with one tanh hidden layer.

    The loss is the mean cross-entropy over the batch, so a weighted average
    of per-shard full-batch gradients equals the pooled gradient.
    """

    def __init__(self, feature_dim: int, n_classes: int, hidden_units: int = 0):
        self.feature_dim = feature_dim
        self.n_classes = n_classes
        self.hidden_units = hidden_units

    @property
    def dimension(self) -> int:
        d, c, h = self.feature_dim, self.n_classes, self.hidden_units
        if h == 0:
            return d * c + c
        return d * h + h + h * c + c

    def init_params(self, seed: int = 0) -> ModelParams:
        if self.hidden_units == 0:
            return ModelParams(np.zeros(self.dimension))
        rng = np.random.default_rng(seed)
        d, h = self.feature_dim, self.hidden_units
        w = np.zeros(self.dimension)
        w[: d * h] = rng.standard_normal(d * h) / np.sqrt(d)
        return ModelParams(w)

    def _unpack(self, w: np.ndarray):
        d, c, h = self.feature_dim, self.n_classes, self.hidden_units
        if h == 0:
            return w[: d * c].reshape(d, c), w[d * c:]
        i = 0
        w1 = w[i:i + d * h].reshape(d, h); i += d * h
        b1 = w[i:i + h]; i += h
        w2 = w[i:i + h * c].reshape(h, c); i += h * c
        return w1, b1, w2, w[i:]

    def _forward(self, w: np.ndarray, features: np.ndarray):
        parts = self._unpack(w)
        if self.hidden_units == 0:
            W, b = parts
            return features @ W + b, None
        w1, b1, w2, b2 = parts
        hidden = np.tanh(features @ w1 + b1)
        return hidden @ w2 + b2, hidden

    def loss(self, weights: np.ndarray, features: np.ndarray, labels: np.ndarray) -> float:
        logits, _ = self._forward(weights, features)
        rows = np.arange(len(labels))
        return float(np.mean(logsumexp(logits, axis=1) - logits[rows, labels]))

    def loss_and_grad(self, weights: np.ndarray, features: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
        n = len(labels)
        logits, hidden = self._forward(weights, features)
        rows = np.arange(n)
        loss = float(np.mean(logsumexp(logits, axis=1) - logits[rows, labels]))
        delta = softmax(logits, axis=1)
        delta[rows, labels] -= 1.0
        delta /= n
        if self.hidden_units == 0:
            return loss, np.concatenate([(features.T @ delta).ravel(), delta.sum(axis=0)])
        _, _, w2, _ = self._unpack(weights)
        d_hidden = (delta @ w2.T) * (1.0 - hidden ** 2)
        return loss, np.concatenate([
            (features.T @ d_hidden).ravel(),
            d_hidden.sum(axis=0),
            (hidden.T @ delta).ravel(),
            delta.sum(axis=0),
        ])

    def predict(self, weights: np.ndarray, features: np.ndarray) -> np.ndarray:
        logits, _ = self._forward(weights, features)
        return np.argmax(logits, axis=1)


def client_update(
    k: int,
    w: ModelParams,
    data: ClientDataset,
    B: int,
    E: int,
    eta: float,
    objective: Objective,
    shuffle: Optional[Callable[[int], np.random.Generator]] = None,
) -> ModelParams:
    """E epochs of minibatch SGD over the device's shard.

    `shuffle(epoch)` returns the generator that orders that epoch's batches;
    without it, or when one batch covers the shard, samples keep their order.
    The last batch may be short.
    """
    if B < 1 or E < 1 or eta < 0:
        raise ValueError(f"device {k}: need B >= 1, E >= 1, eta >= 0")
    n = len(data)
    if n == 0:
        raise EmptyDataset(f"device {k} has no samples")
    weights = np.array(w.weights, dtype=np.float64)
    for epoch in range(E):
        if shuffle is not None and B < n:
            order = shuffle(epoch).permutation(n)
        else:
            order = np.arange(n)
        for start in range(0, n, B):
            batch = order[start:start + B]
            _, grad = objective.loss_and_grad(weights, data.features[batch], data.labels[batch])
            weights = weights - eta * grad
    return ModelParams(weights)


def aggregate(updates: Mapping[int, ModelParams], counts: Mapping[int, int]) -> ModelParams:
    """Sample-count weighted average, summed in ascending device id order"""
    if not updates:
        raise ValueError("no client updates to aggregate")
    owners = sorted(updates)
    dimension = updates[owners[0]].dimension
    for owner in owners:
        if updates[owner].dimension != dimension:
            raise DimensionMismatch(f"device {owner} sent {updates[owner].dimension} weights, expected {dimension}")
        if counts.get(owner, 0) <= 0:
            raise ValueError(f"device {owner} needs a positive sample count")
    total = float(sum(counts[owner] for owner in owners))
    result = np.zeros(dimension)
    for owner in owners:
        result += (counts[owner] / total) * updates[owner].weights
    return ModelParams(result)


def evaluate(w: ModelParams, test_set: LabeledDataset, objective: Objective) -> Tuple[float, float]:
    """(mean loss, accuracy in percent)"""
    if len(test_set) == 0:
        raise EmptyDataset("test set is empty")
    loss, _ = objective.loss_and_grad(w.weights, test_set.features, test_set.labels)
    predictions = objective.predict(w.weights, test_set.features)
    accuracy = 100.0 * float(np.mean(predictions == test_set.labels))
    return float(loss), accuracy
