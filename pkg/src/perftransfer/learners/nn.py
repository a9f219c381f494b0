"""Small feedforward rectifier network trained by mini-batch gradient descent."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DivergenceError, FitError

HIDDEN = (16, 16)
DEFAULT_STEPS = 20_000  # gradient steps when epochs is not given
MIN_EPOCHS, MAX_EPOCHS = 20, 5_000
DEFAULT_BATCH = 16
DEFAULT_STEP = 0.01
DEFAULT_MOMENTUM = 0.9


@dataclass(frozen=True, eq=False)
class NeuralNetModel:
    weights: tuple  # (in, out) matrices
    biases: tuple
    y_mean: float
    y_sd: float

    @property
    def dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def layer_sizes(self) -> tuple:
        return (self.dim, *(w.shape[1] for w in self.weights))

    def predict_encoded(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ValueError(f"expected features of width {self.dim}, got shape {X.shape}")
        return forward(self.weights, self.biases, X)[-1][:, 0] * self.y_sd + self.y_mean

    def to_dict(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "y_mean": float(self.y_mean),
            "y_sd": float(self.y_sd),
        }

    @classmethod
    def from_dict(cls, d: dict, dim: int) -> "NeuralNetModel":
        weights = tuple(np.array(w, dtype=np.float64) for w in d["weights"])
        if weights[0].shape[0] != dim:
            raise ValueError(f"network input width {weights[0].shape[0]} does not match space dimension {dim}")
        return cls(
            weights,
            tuple(np.array(b, dtype=np.float64) for b in d["biases"]),
            float(d["y_mean"]),
            float(d["y_sd"]),
        )


def init_params(sizes, rng: np.random.Generator):
    """Glorot-uniform weights in [-r, r], r = sqrt(6 / (fan_in + fan_out)); zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        r = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-r, r, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def forward(weights, biases, X):
    """Activations of every layer; the last one is the linear output."""
    acts = [X]
    for layer, (w, b) in enumerate(zip(weights, biases)):
        z = acts[-1] @ w + b
        acts.append(z if layer == len(weights) - 1 else np.maximum(z, 0.0))
    return acts


def loss_and_grad(weights, biases, X, t):
    """Mean squared error of the network output against ``t`` and its gradient."""
    acts = forward(weights, biases, X)
    diff = acts[-1][:, 0] - t
    loss = float(np.mean(diff * diff))
    delta = (2.0 / len(t)) * diff[:, None]
    gw, gb = [None] * len(weights), [None] * len(weights)
    for layer in range(len(weights) - 1, -1, -1):
        gw[layer] = acts[layer].T @ delta
        gb[layer] = delta.sum(axis=0)
        if layer:
            delta = (delta @ weights[layer].T) * (acts[layer] > 0)
    return loss, gw, gb


def default_epochs(n: int, batch: int) -> int:
    per_epoch = math.ceil(n / batch)
    return min(MAX_EPOCHS, max(MIN_EPOCHS, math.ceil(DEFAULT_STEPS / per_epoch)))


def fit_nn(
    X,
    y,
    epochs: int | None = None,
    batch: int = DEFAULT_BATCH,
    step: float = DEFAULT_STEP,
    seed: int = 0,
    momentum: float = DEFAULT_MOMENTUM,
) -> NeuralNetModel:
    """Train a d-16-16-1 network on standardized targets.

    Each epoch visits the rows in a fresh seeded permutation. Without an
    explicit ``epochs`` the run lasts about ``DEFAULT_STEPS`` mini-batch steps,
    so small training sets get as many updates as large ones. Raises
    :class:`DivergenceError` when the loss stops being finite.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise FitError("neural net training needs at least 2 rows")
    if len(y) != X.shape[0]:
        raise FitError(f"{X.shape[0]} feature rows but {len(y)} targets")
    n, dim = X.shape
    y_mean = float(np.mean(y))
    y_sd = float(np.std(y))
    if y_sd == 0.0:
        y_sd = 1.0
    t = (y - y_mean) / y_sd

    rng = np.random.default_rng(seed)
    weights, biases = init_params((dim, *HIDDEN, 1), rng)
    vel_w = [np.zeros_like(w) for w in weights]
    vel_b = [np.zeros_like(b) for b in biases]
    batch = max(1, min(batch, n))
    if epochs is None:
        epochs = default_epochs(n, batch)
    for epoch in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            rows = order[start:start + batch]
            with np.errstate(over="ignore", invalid="ignore"):  # divergence is reported below
                loss, gw, gb = loss_and_grad(weights, biases, X[rows], t[rows])
            if not math.isfinite(loss):
                raise DivergenceError(f"divergence at epoch {epoch}: non-finite loss; try a smaller step size")
            for layer in range(len(weights)):
                vel_w[layer] = momentum * vel_w[layer] - step * gw[layer]
                vel_b[layer] = momentum * vel_b[layer] - step * gb[layer]
                weights[layer] = weights[layer] + vel_w[layer]
                biases[layer] = biases[layer] + vel_b[layer]
    if not all(np.all(np.isfinite(w)) for w in weights):
        raise DivergenceError("divergence: non-finite weights; try a smaller step size")
    return NeuralNetModel(tuple(weights), tuple(biases), y_mean, y_sd)
