"""Mean regression: the constant predictor used as the reference baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset
from .base import LearnerSpec, RegressionFunction


class MeanRegression(RegressionFunction):
    def __init__(self, value: float, n_features: int):
        self.value = float(value)
        self.n_features = int(n_features)

    def predict(self, X):
        X = self._as_matrix(X)
        return np.full(X.shape[0], self.value)

    def __repr__(self):
        return f"MeanRegression({self.value!r})"


@dataclass(frozen=True)
class MeanSpec(LearnerSpec):
    name: str = "mean"

    def train(self, tr: Dataset, rng=None) -> MeanRegression:
        return train_mean(tr)


def train_mean(tr: Dataset) -> MeanRegression:
    """Constant predictor at the mean of the training targets."""
    return MeanRegression(float(np.mean(tr.targets)), tr.n_features)
