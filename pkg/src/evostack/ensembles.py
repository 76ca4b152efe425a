"""Bagging and two-level stacked generalization over arbitrary learner specs.

Stacking trains the level-2 learner on out-of-fold level-1 predictions: the
training data is split into `folds` folds; for each fold, every level-1
member is trained on the other folds and predicts the held-out samples, and
those predictions (one column per member, in ensemble order) paired with the
true targets become the level-2 training rows — exactly one row per training
sample. The members are then refit on the full data and the trained level-2
model consumes their outputs at prediction time.

All per-(fold, member) training streams are spawned deterministically off the
caller's rng, so training is a pure function of (spec, data, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, assign_folds
from .learners import LearnerSpec, RegressionFunction, TrainingError
from .learners.base import train_bagged
from .seeding import as_rng

__all__ = [
    "BaggingSpec",
    "StackingSpec",
    "ComposedRegression",
    "train_bagging",
    "train_stacking",
    "compose",
    "level2_training_set",
]


@dataclass(frozen=True)
class BaggingSpec(LearnerSpec):
    """Train `t` copies of the base learner on bootstrap resamples; average."""

    base: LearnerSpec
    t: int = 20
    name: str = ""

    def __post_init__(self):
        if self.t < 1:
            raise ValueError(f"bag count must be >= 1, got {self.t}")
        if not self.name:
            object.__setattr__(self, "name", f"bag{self.t}x_{self.base.name}")

    def train(self, tr: Dataset, rng) -> RegressionFunction:
        return train_bagging(self, tr, rng)


@dataclass(frozen=True)
class StackingSpec(LearnerSpec):
    """Ordered level-1 members, a level-2 aggregator, and the internal fold count."""

    ensemble: tuple[LearnerSpec, ...]
    l2: LearnerSpec
    folds: int = 5
    name: str = ""

    def __post_init__(self):
        members = tuple(self.ensemble)
        if not members:
            raise ValueError("stacking ensemble must not be empty")
        if not 2 <= self.folds <= 6:
            raise ValueError(f"stacking folds must lie in [2, 6], got {self.folds}")
        object.__setattr__(self, "ensemble", members)
        if not self.name:
            object.__setattr__(
                self, "name", f"stack{self.folds}f_{self.l2.name}_m{len(members)}")

    def train(self, tr: Dataset, rng) -> RegressionFunction:
        return train_stacking(self, tr, rng)


def train_bagging(spec: BaggingSpec, tr: Dataset, rng) -> RegressionFunction:
    """Bootstrap-train spec.base `t` times and average the predictions."""
    return train_bagged(spec.base.train, tr, spec.t, as_rng(rng),
                        what=f"{spec.name} bag")


def level2_training_set(ensemble, folds: int, tr: Dataset, rng):
    """Out-of-fold level-1 predictions for every training sample.

    Returns (features, targets, origin): row j holds the members' predictions
    for training sample origin[j], produced by models that never saw that
    sample. Rows are ordered by (fold, position within fold); every sample
    index appears exactly once, so there are exactly N rows.
    """
    members = tuple(ensemble)
    if not members:
        raise ValueError("stacking ensemble must not be empty")
    if folds > tr.n_samples:
        raise TrainingError(f"{folds} folds but only {tr.n_samples} samples")
    rng = as_rng(rng)
    fold_rng = rng.spawn(1)[0]
    fa = assign_folds(tr.n_samples, folds, fold_rng)
    member_rngs = rng.spawn(folds * len(members))

    blocks, targets, origins = [], [], []
    for fold in range(folds):
        train_idx = fa.train_indices(fold)
        test_idx = fa.test_indices(fold)
        sub = tr.subset(train_idx)
        test_X = tr.features[test_idx]
        columns = []
        for j, member in enumerate(members):
            r = member_rngs[fold * len(members) + j]
            try:
                model = member.train(sub, r)
            except Exception as exc:
                raise TrainingError(
                    f"fold {fold}, learner '{member.name}': {exc}") from exc
            columns.append(model.predict(test_X))
        blocks.append(np.column_stack(columns))
        targets.append(tr.targets[test_idx])
        origins.append(test_idx)
    return np.vstack(blocks), np.concatenate(targets), np.concatenate(origins)


def train_stacking(spec: StackingSpec, tr: Dataset, rng) -> RegressionFunction:
    """Stacked generalization: out-of-fold level-2 data, full refit, compose."""
    rng = as_rng(rng)
    z, zy, _ = level2_training_set(spec.ensemble, spec.folds, tr, rng)
    final_rngs = rng.spawn(len(spec.ensemble) + 1)
    level1 = []
    for j, member in enumerate(spec.ensemble):
        try:
            level1.append(member.train(tr, final_rngs[j]))
        except Exception as exc:
            raise TrainingError(f"final fit, learner '{member.name}': {exc}") from exc
    l2_data = Dataset(z, zy, name=f"{tr.name}:level2")
    try:
        l2_model = spec.l2.train(l2_data, final_rngs[-1])
    except Exception as exc:
        raise TrainingError(f"level-2 learner '{spec.l2.name}': {exc}") from exc
    return compose(level1, l2_model)


class ComposedRegression(RegressionFunction):
    """Feed the level-1 models' outputs (in order) into the level-2 model."""

    def __init__(self, level1, level2: RegressionFunction):
        level1 = tuple(level1)
        if not level1:
            raise ValueError("need at least one level-1 model")
        if level2.n_features != len(level1):
            raise ValueError(
                f"level-2 model expects {level2.n_features} inputs, "
                f"got {len(level1)} level-1 models")
        dims = {m.n_features for m in level1}
        if len(dims) != 1:
            raise ValueError(f"level-1 models disagree on input dimension: {sorted(dims)}")
        self.level1 = level1
        self.level2 = level2
        self.n_features = level1[0].n_features

    def predict(self, X):
        X = self._as_matrix(X)
        z = np.column_stack([m.predict(X) for m in self.level1])
        return self.level2.predict(z)


def compose(level1, level2: RegressionFunction) -> ComposedRegression:
    """x -> level2(level1_0(x), ..., level1_n(x))."""
    return ComposedRegression(level1, level2)
