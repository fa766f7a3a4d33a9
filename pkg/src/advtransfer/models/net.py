"""Fully-connected ReLU network with a softmax head, trained by backprop."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError
from .base import Model, one_hot, softmax


@dataclass
class NetHyperparams:
    hidden: tuple[int, ...] = (128, 64)
    epochs: int = 10
    learning_rate: float = 1e-2
    momentum: float = 0.9
    decay_epoch: int = 5
    batch_size: int = 100
    init_scale: float | None = None  # None -> He initialization


class NeuralNet(Model):
    """MLP: affine layers with ReLU hidden activations and a softmax output."""

    family = "net"
    differentiable = True

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        weights = [np.asarray(W, dtype=np.float64) for W in weights]
        biases = [np.asarray(b, dtype=np.float64) for b in biases]
        super().__init__(weights[0].shape[1], weights[-1].shape[0])
        self.weights = weights
        self.biases = biases

    def _forward(self, X: np.ndarray):
        """Return (softmax probs, pre-activations per layer, activations per layer)."""
        pre, acts = [], [X]
        a = X
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ W.T + b
            pre.append(z)
            a = z if i == len(self.weights) - 1 else np.maximum(z, 0.0)
            acts.append(a)
        return softmax(pre[-1]), pre, acts

    def scores_batch(self, X: np.ndarray) -> np.ndarray:
        return self._forward(X)[0]

    def _backprop_to_input(self, pre: list[np.ndarray], delta_logits: np.ndarray) -> np.ndarray:
        d = delta_logits
        for i in range(len(self.weights) - 1, 0, -1):
            d = (d @ self.weights[i]) * (pre[i - 1] > 0.0)
        return d @ self.weights[0]

    def input_gradient(self, x, y):
        """Gradient of the cross-entropy cost -log p_y(x) w.r.t. the input."""
        X, single = self._as_batch(x)
        y_arr = np.atleast_1d(np.asarray(y, dtype=np.int64))
        p, pre, _ = self._forward(X)
        grad = self._backprop_to_input(pre, p - one_hot(y_arr, self.num_classes))
        return grad[0] if single else grad

    def jacobian(self, x) -> np.ndarray:
        """Rows are d p_i / d x, obtained by the chain rule through every layer."""
        X, _ = self._as_batch(x)
        p, pre, _ = self._forward(X)
        # Jacobian of logits w.r.t. x, then compose with the softmax Jacobian.
        M = self.weights[0]
        for i in range(1, len(self.weights)):
            M = self.weights[i] @ ((pre[i - 1][0] > 0.0)[:, None] * M)
        p0 = p[0]
        return (np.diag(p0) - np.outer(p0, p0)) @ M

    def jacobian_rows(self, X: np.ndarray, rows: np.ndarray) -> np.ndarray:
        # Row k of the softmax Jacobian equals backprop with seed p_k*(e_k - p).
        X, _ = self._as_batch(X)
        rows = np.asarray(rows, dtype=np.int64)
        p, pre, _ = self._forward(X)
        seed = -p * p[np.arange(len(X)), rows][:, None]
        seed[np.arange(len(X)), rows] += p[np.arange(len(X)), rows]
        return self._backprop_to_input(pre, seed)


def train_neural_net(dataset, hyper: NetHyperparams | None = None, seed=0):
    """Mini-batch SGD with momentum; lr and momentum halve at decay_epoch."""
    if dataset.num_classes < 2:
        raise TrainingError("network training needs at least two classes")
    hyper = hyper or NetHyperparams()
    rng = np.random.default_rng(seed)
    n, d = dataset.X.shape
    sizes = [d, *hyper.hidden, dataset.num_classes]

    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        scale = hyper.init_scale if hyper.init_scale is not None else np.sqrt(2.0 / fan_in)
        weights.append(rng.normal(0.0, scale, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    vW = [np.zeros_like(W) for W in weights]
    vb = [np.zeros_like(b) for b in biases]
    Y = one_hot(dataset.y, dataset.num_classes)
    net = NeuralNet(weights, biases)

    lr, mom = hyper.learning_rate, hyper.momentum
    for epoch in range(hyper.epochs):
        if epoch == hyper.decay_epoch:
            lr *= 0.5
            mom *= 0.5
        order = rng.permutation(n)
        for start in range(0, n, hyper.batch_size):
            idx = order[start : start + hyper.batch_size]
            Xb, Yb = dataset.X[idx], Y[idx]
            p, pre, acts = net._forward(Xb)
            delta = (p - Yb) / len(idx)
            for i in range(len(net.weights) - 1, -1, -1):
                gW = delta.T @ acts[i]
                gb = delta.sum(axis=0)
                if i > 0:
                    delta = (delta @ net.weights[i]) * (pre[i - 1] > 0.0)
                vW[i] = mom * vW[i] - lr * gW
                vb[i] = mom * vb[i] - lr * gb
                net.weights[i] = net.weights[i] + vW[i]
                net.biases[i] = net.biases[i] + vb[i]
    return net
