"""Distance-weighted k-nearest-neighbor regression.

The prediction for a query x is the weighted mean of the k nearest training
targets, with weight 1 / d**alpha for a neighbor at distance d. alpha = 0
gives the plain k-neighbor average; large alpha approaches the single
nearest neighbor. Exact matches dominate: if any selected neighbor sits at
distance exactly 0, the prediction is the unweighted mean of the
zero-distance neighbors' targets (the alpha -> infinity limit, and the only
way to avoid dividing by zero).

Ties at the k-th neighbor are broken by (distance, training-row index), so
predictions are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset
from .base import LearnerSpec, RegressionFunction

METRICS = ("manhattan", "euclidean")

# cap on chunk * N * p floats materialized while computing distances
_CHUNK_BUDGET = 4_000_000


@dataclass(frozen=True)
class KNNSpec(LearnerSpec):
    k: int
    alpha: float
    metric: str = "manhattan"
    name: str = ""

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if not self.name:
            object.__setattr__(
                self, "name", f"knn_k{self.k}_a{self.alpha:g}_{self.metric}")

    def train(self, tr: Dataset, rng=None) -> "KNNRegression":
        return train_knn(tr, self.k, self.alpha, self.metric)


class KNNRegression(RegressionFunction):
    def __init__(self, features: np.ndarray, targets: np.ndarray, k: int,
                 alpha: float, metric: str):
        self._X = features
        self._y = targets
        self.k = k
        self.alpha = alpha
        self.metric = metric
        self.n_features = features.shape[1]

    def predict(self, X):
        X = self._as_matrix(X)
        n_train = self._X.shape[0]
        out = np.empty(X.shape[0])
        chunk = max(1, _CHUNK_BUDGET // max(1, n_train * self.n_features))
        for start in range(0, X.shape[0], chunk):
            block = X[start:start + chunk]
            out[start:start + block.shape[0]] = self._predict_block(block)
        return out

    def _distances(self, Q):
        diff = Q[:, None, :] - self._X[None, :, :]
        if self.metric == "euclidean":
            return np.sqrt(np.sum(diff * diff, axis=2))
        return np.sum(np.abs(diff), axis=2)

    def _predict_block(self, Q):
        D = self._distances(Q)
        # stable sort => equal distances keep ascending training-row order
        nearest = np.argsort(D, axis=1, kind="stable")[:, : self.k]
        dist = np.take_along_axis(D, nearest, axis=1)
        targ = self._y[nearest]
        out = np.empty(Q.shape[0])
        for i in range(Q.shape[0]):
            d, t = dist[i], targ[i]
            zero = d == 0.0
            if zero.any():
                out[i] = float(t[zero].mean())
            elif self.alpha == 0.0:
                out[i] = float(t.mean())
            else:
                # same weighted mean as 1/d**alpha, rescaled by the nearest
                # distance so huge alpha cannot overflow
                w = (d[0] / d) ** self.alpha
                out[i] = float((w @ t) / w.sum())
        return out


def train_knn(tr: Dataset, k: int, alpha: float, metric: str) -> KNNRegression:
    if not 1 <= k <= tr.n_samples:
        raise ValueError(f"k must lie in [1, {tr.n_samples}], got {k}")
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    return KNNRegression(tr.features, tr.targets, int(k), float(alpha), metric)
