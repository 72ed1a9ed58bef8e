"""Feed-forward binary classifier trained by backpropagation.

Sigmoid activations throughout (hidden and output), class-weighted
binary cross-entropy loss, adaptive-moment (Adam) gradient descent.
Written directly in numpy so the analytic gradients can be checked
against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.special import expit

from .features import class_weights

DEPTH_GRID = (1, 3, 5)
WIDTH_GRID = (3, 5, 10)

_EPS = 1e-12


@dataclass(frozen=True)
class MlpHyperparams:
    depth: int = 3              # hidden layers
    width: int = 10             # neurons per hidden layer
    learning_rate: float = 0.05
    epochs: int = 200
    batch_size: int = 64
    patience: int = 20          # early-stop patience in epochs

    def __post_init__(self):
        if self.depth < 1 or self.width < 1:
            raise ValueError("depth and width must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")


def default_mlp_grid(**overrides) -> list[MlpHyperparams]:
    """Depth x width grid from the hyperparameter table."""
    return [
        MlpHyperparams(depth=d, width=w, **overrides)
        for d, w in product(DEPTH_GRID, WIDTH_GRID)
    ]


class MlpNetwork:
    """Plain numpy MLP; parameters live in self.weights / self.biases."""

    def __init__(self, n_features: int, depth: int, width: int,
                 rng: np.random.Generator):
        sizes = [n_features] + [width] * depth + [1]
        self.sizes = sizes
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            self.weights.append(rng.normal(0.0, 1.0 / np.sqrt(fan_in), (fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    def forward(self, x: np.ndarray) -> list[np.ndarray]:
        """Activations per layer; the last entry is the score column."""
        acts = [np.asarray(x, dtype=float)]
        for w, b in zip(self.weights, self.biases):
            acts.append(expit(acts[-1] @ w + b))
        return acts

    def scores(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[-1][:, 0]

    def loss(self, x: np.ndarray, y: np.ndarray, sample_weight: np.ndarray) -> float:
        p = np.clip(self.scores(x), _EPS, 1.0 - _EPS)
        y = np.asarray(y, dtype=float)
        bce = -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
        return float(np.mean(sample_weight * bce))

    def loss_and_gradients(self, x, y, sample_weight):
        """Weighted-mean BCE and its gradients w.r.t. every weight/bias."""
        y = np.asarray(y, dtype=float)
        n = y.size
        acts = self.forward(x)
        p = np.clip(acts[-1][:, 0], _EPS, 1.0 - _EPS)
        bce = -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
        loss = float(np.mean(sample_weight * bce))

        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        # Sigmoid output + BCE collapse to (p - y) at the output layer.
        delta = (sample_weight * (acts[-1][:, 0] - y) / n)[:, None]
        for layer in range(len(self.weights) - 1, -1, -1):
            grads_w[layer] = acts[layer].T @ delta
            grads_b[layer] = delta.sum(axis=0)
            if layer > 0:
                a = acts[layer]
                delta = (delta @ self.weights[layer].T) * a * (1.0 - a)
        return loss, grads_w, grads_b

    # flat parameter view, used by the finite-difference check
    def get_flat_params(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.weights + self.biases])

    def set_flat_params(self, flat: np.ndarray) -> None:
        pos = 0
        for group in (self.weights, self.biases):
            for i, p in enumerate(group):
                group[i] = flat[pos:pos + p.size].reshape(p.shape).copy()
                pos += p.size
        if pos != flat.size:
            raise ValueError("parameter vector has the wrong length")

    def flat_gradients(self, x, y, sample_weight) -> tuple[float, np.ndarray]:
        loss, gw, gb = self.loss_and_gradients(x, y, sample_weight)
        return loss, np.concatenate([g.ravel() for g in gw + gb])

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MlpNetwork":
        net = cls.__new__(cls)
        net.sizes = list(data["sizes"])
        net.weights = [np.asarray(w, dtype=float) for w in data["weights"]]
        net.biases = [np.asarray(b, dtype=float) for b in data["biases"]]
        return net


class _Adam:
    def __init__(self, params: list[np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            m_hat = self.m[i] / (1 - self.beta1 ** self.t)
            v_hat = self.v[i] / (1 - self.beta2 ** self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def train_mlp_network(x, y, hp: MlpHyperparams, rng: np.random.Generator,
                      x_val=None, y_val=None) -> tuple[MlpNetwork, dict]:
    """Fit one network; early-stops on validation loss when given.

    Per-sample weights are inverse class frequencies of the training set,
    normalized to mean one; the same class weights score the validation
    rows.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    weights = class_weights(y)  # raises on a single class
    counts = np.bincount(y, minlength=2)
    w_per_class = y.size / (2.0 * counts)

    net = MlpNetwork(x.shape[1], hp.depth, hp.width, rng)
    opt = _Adam(net.weights + net.biases, hp.learning_rate)
    n = x.shape[0]
    history = {"train_loss": [], "val_loss": []}
    monitor_val = x_val is not None and y_val is not None
    if monitor_val:
        y_val = np.asarray(y_val, dtype=int)
        val_weights = w_per_class[y_val]
    best_loss = np.inf
    best_params = None
    stale = 0

    for _ in range(hp.epochs):
        order = rng.permutation(n)
        for start in range(0, n, hp.batch_size):
            idx = order[start:start + hp.batch_size]
            _, gw, gb = net.loss_and_gradients(x[idx], y[idx], weights[idx])
            opt.step(net.weights + net.biases, gw + gb)
        train_loss = net.loss(x, y, weights)
        history["train_loss"].append(train_loss)
        monitored = train_loss
        if monitor_val:
            monitored = net.loss(x_val, y_val, val_weights)
            history["val_loss"].append(monitored)
        if monitored < best_loss - 1e-7:
            best_loss = monitored
            stale = 0
            if monitor_val:
                best_params = net.get_flat_params()
        else:
            stale += 1
            if stale >= hp.patience:
                break
    if monitor_val and best_params is not None:
        net.set_flat_params(best_params)
    return net, history
