"""Learner interfaces shared by all families.

A `LearnerSpec` is an untrained method with fixed hyperparameters; training
it on a dataset yields a `RegressionFunction`. Trainers are pure functions of
(spec, data, rng stream), trained models are immutable, and prediction is
deterministic and reentrant.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from ..data import Dataset


class TrainingError(RuntimeError):
    """A learner failed to train; messages carry fold/bag/learner context."""


class RegressionFunction(ABC):
    """A trained model: maps p-dimensional feature vectors to scalar predictions."""

    n_features: int

    @abstractmethod
    def predict(self, X) -> np.ndarray:
        """One scalar prediction per row of an (n, p) feature matrix."""

    def predict_one(self, x) -> float:
        """Prediction for a single feature vector."""
        return float(self.predict(np.asarray(x, dtype=float).reshape(1, -1))[0])

    def _as_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"expected feature matrix of shape (n, {self.n_features}), got {X.shape}")
        return X


class LearnerSpec(ABC):
    """An untrained learner: a method plus fixed hyperparameters.

    `name` is the display name; it must be unique within a registry.
    """

    name: str

    @abstractmethod
    def train(self, tr: Dataset, rng: np.random.Generator) -> RegressionFunction:
        """Train on `tr`; any randomness is drawn from `rng`."""


class AveragePredictor(RegressionFunction):
    """Arithmetic mean of the member models' predictions."""

    def __init__(self, members):
        members = tuple(members)
        if not members:
            raise ValueError("need at least one member model")
        dims = {m.n_features for m in members}
        if len(dims) != 1:
            raise ValueError(f"member models disagree on input dimension: {sorted(dims)}")
        self.members = members
        self.n_features = members[0].n_features

    def predict(self, X):
        X = self._as_matrix(X)
        return np.mean([m.predict(X) for m in self.members], axis=0)


def train_bagged(train_fn, tr: Dataset, bags: int, rng, *, what: str = "bag") -> AveragePredictor:
    """Train `bags` models on bootstrap resamples (size N, with replacement).

    Member i draws its bootstrap indices from the i-th child stream spawned
    off `rng` and is then trained with that same stream, so the result is a
    pure function of (tr, bags, seed). Training failures are annotated with
    the bag index.
    """
    if bags < 1:
        raise ValueError(f"bag count must be >= 1, got {bags}")
    members = []
    for i, child in enumerate(rng.spawn(bags)):
        idx = child.integers(0, tr.n_samples, size=tr.n_samples)
        try:
            members.append(train_fn(tr.subset(idx), child))
        except Exception as exc:
            raise TrainingError(f"{what} {i}: {exc}") from exc
    return AveragePredictor(members)
