"""RMSE, k-fold cross-validation, and proportional-split evaluation.

Cross-validation assigns folds randomly, trains on the k-1 other folds,
predicts the held-out fold, and pools all held-out residuals — each sample
is predicted exactly once, so the pooled RMSE is the headline number.
Per-fold RMSEs are kept for diagnostics. Every report also carries the
mean-regression baseline evaluated on the identical protocol, and the
ratio baseline/learner ("mean cmp").
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import DataError, Dataset, assign_folds
from .learners import LearnerSpec, MeanSpec, TrainingError
from .parallel import run_tasks
from .seeding import child_seed, spawn_rng

__all__ = ["EvalReport", "rmse", "cross_validate", "proportional_eval",
           "proportional_split"]


def rmse(predictions, truths) -> float:
    """sqrt(mean squared difference) over paired finite vectors."""
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(truths, dtype=float)
    if p.ndim != 1 or p.shape != t.shape:
        raise ValueError(f"shape mismatch: predictions {p.shape} vs truths {t.shape}")
    if p.size == 0:
        raise ValueError("cannot compute RMSE of empty vectors")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(t))):
        raise ValueError("non-finite values in RMSE input")
    return float(np.sqrt(np.mean((p - t) ** 2)))


@dataclass(frozen=True)
class EvalReport:
    """Evaluation result plus the configuration that produced it."""

    learner: str
    dataset: str
    n_samples: int
    mode: str  # "cv" | "split"
    folds: int | None
    train_ratio: float | None
    n_train: int | None
    seed: int | None
    per_fold_rmse: tuple[float, ...]
    rmse: float  # pooled over all held-out predictions
    reference_rmse: float | None  # mean-regression baseline, same protocol

    @property
    def mean_cmp(self) -> float | None:
        """reference RMSE / learner RMSE (how many times better than the mean)."""
        if self.reference_rmse is None:
            return None
        if self.rmse == 0.0:
            return math.inf
        return self.reference_rmse / self.rmse

    def _protocol(self) -> str:
        if self.mode == "cv":
            return f"{self.folds}-fold cross-validation"
        return f"proportional split (train ratio {self.train_ratio:g}, n_train {self.n_train})"

    def to_text(self) -> str:
        lines = [
            f"learner: {self.learner}",
            f"dataset: {self.dataset} (n={self.n_samples})",
            f"protocol: {self._protocol()}",
            f"seed: {self.seed}",
            "fold_rmse: " + ", ".join(repr(v) for v in self.per_fold_rmse),
            f"pooled_rmse: {self.rmse!r}",
        ]
        if self.reference_rmse is not None:
            lines.append(f"mean_reference_rmse: {self.reference_rmse!r}")
            lines.append(f"mean_cmp: {self.mean_cmp:.2f} ({self.mean_cmp!r})")
        return "\n".join(lines) + "\n"

    CSV_HEADER = ("learner,dataset,n,mode,folds,train_ratio,seed,"
                  "pooled_rmse,reference_rmse,mean_cmp,fold_rmse")

    def to_csv(self) -> str:
        ratio = "" if self.train_ratio is None else repr(self.train_ratio)
        folds = "" if self.folds is None else str(self.folds)
        ref = "" if self.reference_rmse is None else repr(self.reference_rmse)
        cmp_ = "" if self.mean_cmp is None else repr(self.mean_cmp)
        row = (f"{self.learner},{self.dataset},{self.n_samples},{self.mode},"
               f"{folds},{ratio},{self.seed},{self.rmse!r},{ref},{cmp_},"
               + "|".join(repr(v) for v in self.per_fold_rmse))
        return self.CSV_HEADER + "\n" + row + "\n"


def _materialize_seed(seed) -> int:
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(0, 2 ** 63))
    return int(seed)


def _cv_fold_task(args):
    spec, data, membership, fold, fold_seed = args
    train_idx = np.nonzero(membership != fold)[0]
    test_idx = np.nonzero(membership == fold)[0]
    try:
        model = spec.train(data.subset(train_idx), spawn_rng(fold_seed))
    except TrainingError as exc:
        raise TrainingError(f"fold {fold}: {exc}") from exc
    except Exception as exc:
        raise TrainingError(f"fold {fold}, learner '{spec.name}': {exc}") from exc
    return model.predict(data.features[test_idx]), data.targets[test_idx]


def cross_validate(spec: LearnerSpec, data: Dataset, k: int, seed,
                   *, jobs: int = 1, with_reference: bool = True) -> EvalReport:
    """k-fold CV of any trainable spec; deterministic for a fixed seed."""
    if not 2 <= k <= data.n_samples:
        raise DataError(f"fold count must lie in [2, {data.n_samples}], got {k}")
    seed = _materialize_seed(seed)
    fa = assign_folds(data.n_samples, k, spawn_rng(seed, "folds"))
    tasks = [(spec, data, fa.membership, fold, child_seed(seed, "fold", fold))
             for fold in range(k)]
    results = run_tasks(_cv_fold_task, tasks, jobs=jobs)

    def pool(fold_results):
        preds = np.concatenate([p for p, _ in fold_results])
        truths = np.concatenate([t for _, t in fold_results])
        per_fold = tuple(rmse(p, t) for p, t in fold_results)
        return per_fold, rmse(preds, truths)

    per_fold, pooled = pool(results)
    reference = None
    if with_reference:
        ref_results = [_cv_fold_task((MeanSpec(), data, fa.membership, fold,
                                      child_seed(seed, "fold", fold)))
                       for fold in range(k)]
        reference = pool(ref_results)[1]
    return EvalReport(
        learner=spec.name, dataset=data.name, n_samples=data.n_samples,
        mode="cv", folds=k, train_ratio=None, n_train=None, seed=seed,
        per_fold_rmse=per_fold, rmse=pooled, reference_rmse=reference)


def proportional_split(n: int, train_ratio: float, seed) -> tuple[np.ndarray, np.ndarray]:
    """One random split with floor(ratio * n) training samples."""
    if not 0.0 < train_ratio < 1.0:
        raise DataError(f"train ratio must lie in (0, 1), got {train_ratio}")
    n_train = math.floor(train_ratio * n)
    if n_train < 1 or n - n_train < 1:
        raise DataError(
            f"degenerate split: {n_train} train / {n - n_train} test samples from n={n}")
    perm = spawn_rng(_materialize_seed(seed), "split").permutation(n)
    return perm[:n_train], perm[n_train:]


def proportional_eval(spec: LearnerSpec, data: Dataset, train_ratio: float, seed,
                      *, with_reference: bool = True) -> EvalReport:
    """Single random train/test split; callers supply a fresh seed per call."""
    seed = _materialize_seed(seed)
    train_idx, test_idx = proportional_split(data.n_samples, train_ratio, seed)
    train = data.subset(train_idx)
    test_X = data.features[test_idx]
    test_y = data.targets[test_idx]

    def evaluate(s: LearnerSpec) -> float:
        try:
            model = s.train(train, spawn_rng(seed, "train"))
        except TrainingError:
            raise
        except Exception as exc:
            raise TrainingError(f"learner '{s.name}': {exc}") from exc
        return rmse(model.predict(test_X), test_y)

    value = evaluate(spec)
    reference = evaluate(MeanSpec()) if with_reference else None
    return EvalReport(
        learner=spec.name, dataset=data.name, n_samples=data.n_samples,
        mode="split", folds=None, train_ratio=float(train_ratio),
        n_train=int(train_idx.size), seed=seed,
        per_fold_rmse=(value,), rmse=value, reference_rmse=reference)
