"""Single-target partial least squares regression (NIPALS, X-deflation only).

Features and target are centered internally; the fitted model is the affine
map ``x -> y_mean + (x - x_mean) @ coef``. Component extraction stops early
when the remaining covariance direction or score norm underflows (rank
exhausted, constant target) or when the data cannot support the requested
count; the model records how many components were actually used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset
from .base import LearnerSpec, RegressionFunction

_TOL = 1e-12
_MAX_INNER = 500


@dataclass(frozen=True)
class PLSSpec(LearnerSpec):
    components: int
    name: str = ""

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", f"pls_l{self.components}")

    def train(self, tr: Dataset, rng=None) -> "PLSRegression":
        return train_pls(tr, self.components)


class PLSRegression(RegressionFunction):
    def __init__(self, x_mean, y_mean, coef, components_requested, components_used):
        self.x_mean = x_mean
        self.y_mean = float(y_mean)
        self.coef = coef
        self.components_requested = int(components_requested)
        self.components_used = int(components_used)
        self.n_features = x_mean.shape[0]

    def predict(self, X):
        X = self._as_matrix(X)
        return self.y_mean + (X - self.x_mean) @ self.coef


def train_pls(tr: Dataset, components: int) -> PLSRegression:
    if components < 1:
        raise ValueError(f"component count must be >= 1, got {components}")
    x_mean = tr.features.mean(axis=0)
    y_mean = float(tr.targets.mean())
    Xd = tr.features - x_mean
    y = tr.targets - y_mean

    cap = min(components, tr.n_features, tr.n_samples - 1)
    weights, loadings, y_loadings = [], [], []
    for _ in range(cap):
        direction = Xd.T @ y
        if np.linalg.norm(direction) <= _TOL:
            break
        t = None
        t_prev = None
        for _ in range(_MAX_INNER):
            w = direction / np.linalg.norm(direction)
            t = Xd @ w
            if t_prev is not None and \
                    np.linalg.norm(t - t_prev) <= _TOL * max(1.0, np.linalg.norm(t)):
                break
            t_prev = t
            # with a single target the covariance direction is already fixed,
            # so the loop converges on the second pass
            direction = Xd.T @ y
        tt = float(t @ t)
        if tt <= _TOL:
            break
        p_load = Xd.T @ t / tt
        c = float(y @ t / tt)
        Xd = Xd - np.outer(t, p_load)
        weights.append(w)
        loadings.append(p_load)
        y_loadings.append(c)

    if not weights:
        coef = np.zeros(tr.n_features)
    else:
        W = np.column_stack(weights)
        P = np.column_stack(loadings)
        c = np.asarray(y_loadings)
        try:
            z = np.linalg.solve(P.T @ W, c)
        except np.linalg.LinAlgError:
            z = np.linalg.lstsq(P.T @ W, c, rcond=None)[0]
        coef = W @ z
    return PLSRegression(x_mean, y_mean, coef, components, len(weights))
