"""Feedforward nets (one hidden layer, symmetric sigmoid units) trained with
resilient backpropagation.

The update rule is the no-backtracking RPROP variant: each weight keeps its
own step size, grown by eta_plus while the gradient sign holds and shrunk by
eta_minus on a sign flip (in which case the stored gradient is zeroed so the
next iteration is treated as sign-neutral). Updates move weights by the step
size against the gradient sign; magnitudes are ignored.

Targets are linearly rescaled to [-1, 1] before training, matching the
symmetric sigmoid output unit, and predictions are mapped back through the
inverse scaling. Training stops at `max_iter` iterations or as soon as the
training MSE (in scaled space) drops below `epsilon`; the per-iteration MSE
trace is kept on the trained model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import DataError, Dataset, fit_scaler
from ..seeding import as_rng
from .base import LearnerSpec, RegressionFunction, train_bagged
from .mean import MeanRegression

ETA_PLUS = 1.2
ETA_MINUS = 0.5
STEP_INITIAL = 0.1
STEP_MIN = 1e-6
STEP_MAX = 50.0


@dataclass(frozen=True)
class NeuralNetSpec(LearnerSpec):
    hidden: int
    max_iter: int = 100
    epsilon: float = 0.001
    name: str = ""

    def __post_init__(self):
        if not self.name:
            object.__setattr__(
                self, "name",
                f"nn_h{self.hidden}_max{self.max_iter}_eps{self.epsilon:g}")

    def train(self, tr: Dataset, rng) -> RegressionFunction:
        return train_mlp_rprop(tr, self.hidden, self.max_iter, self.epsilon, rng)


@dataclass(frozen=True)
class BaggedNetSpec(LearnerSpec):
    """Bootstrap-bagged neural nets, treated as one black-box base learner."""

    bags: int
    net: NeuralNetSpec
    name: str = ""

    def __post_init__(self):
        if self.bags < 1:
            raise ValueError(f"bag count must be >= 1, got {self.bags}")
        if not self.name:
            object.__setattr__(
                self, "name",
                f"bagnn_t{self.bags}_h{self.net.hidden}"
                f"_max{self.net.max_iter}_eps{self.net.epsilon:g}")

    def train(self, tr: Dataset, rng) -> RegressionFunction:
        return train_bagged(self.net.train, tr, self.bags, as_rng(rng),
                            what=f"{self.name} bag")


def forward(X, W1, b1, w2, b2):
    """Network output and hidden activations for an (n, p) input."""
    hidden = np.tanh(X @ W1 + b1)
    return np.tanh(hidden @ w2 + b2), hidden


def mse(X, y, W1, b1, w2, b2) -> float:
    out, _ = forward(X, W1, b1, w2, b2)
    return float(np.mean((out - y) ** 2))


def mse_and_gradients(X, y, W1, b1, w2, b2):
    """Training MSE and its exact gradients for every weight array."""
    out, hidden = forward(X, W1, b1, w2, b2)
    err = out - y
    loss = float(np.mean(err ** 2))
    d_out = (2.0 / y.shape[0]) * err * (1.0 - out ** 2)
    g_w2 = hidden.T @ d_out
    g_b2 = np.array([np.sum(d_out)])
    d_hidden = d_out[:, None] * w2[None, :] * (1.0 - hidden ** 2)
    g_W1 = X.T @ d_hidden
    g_b1 = d_hidden.sum(axis=0)
    return loss, (g_W1, g_b1, g_w2, g_b2)


def _rprop_update(w, g, step, g_prev):
    """In-place no-backtracking RPROP step; returns the carried gradient."""
    change = g * g_prev
    step *= np.where(change > 0, ETA_PLUS, np.where(change < 0, ETA_MINUS, 1.0))
    np.clip(step, STEP_MIN, STEP_MAX, out=step)
    g_eff = np.where(change < 0, 0.0, g)
    w -= np.sign(g_eff) * step
    return g_eff


class MLPRegression(RegressionFunction):
    def __init__(self, W1, b1, w2, b2, scaler, error_trace):
        self.W1, self.b1, self.w2, self.b2 = W1, b1, w2, b2
        self.scaler = scaler
        self.error_trace = np.asarray(error_trace)
        self.n_features = W1.shape[0]

    def predict(self, X):
        X = self._as_matrix(X)
        out, _ = forward(X, self.W1, self.b1, self.w2, self.b2)
        return self.scaler.inverse(out)


def train_mlp_rprop(tr: Dataset, hidden: int, max_iter: int, epsilon: float,
                    rng) -> RegressionFunction:
    """Train a p -> hidden -> 1 tanh network with full-batch RPROP.

    Constant targets make the rescaling degenerate; in that case a constant
    (bias-only) model is returned instead.
    """
    if hidden < 1:
        raise ValueError(f"hidden size must be >= 1, got {hidden}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    try:
        scaler = fit_scaler(tr.targets)
    except DataError:
        return MeanRegression(float(tr.targets[0]), tr.n_features)

    rng = as_rng(rng)
    X = tr.features
    y = scaler.scale(tr.targets)
    p = tr.n_features
    params = [
        rng.uniform(-0.5, 0.5, size=(p, hidden)),
        rng.uniform(-0.5, 0.5, size=hidden),
        rng.uniform(-0.5, 0.5, size=hidden),
        rng.uniform(-0.5, 0.5, size=1),
    ]
    steps = [np.full_like(w, STEP_INITIAL) for w in params]
    prev = [np.zeros_like(w) for w in params]
    trace = []
    for _ in range(max_iter):
        loss, grads = mse_and_gradients(X, y, *params)
        trace.append(loss)
        if loss < epsilon:
            break
        for j, (w, g) in enumerate(zip(params, grads)):
            prev[j] = _rprop_update(w, g, steps[j], prev[j])
    return MLPRegression(*params, scaler=scaler, error_trace=trace)
