"""Dataset handling: CSV ingestion, target rescaling, sub-sampling, fold
assignment, and synthetic dataset generators.

Datasets and fold assignments are immutable after construction (their arrays
are frozen read-only), so they can be shared across parallel workers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .seeding import as_rng

__all__ = [
    "DataError",
    "Dataset",
    "TargetScaler",
    "FoldAssignment",
    "load_csv",
    "load_feature_csv",
    "save_csv",
    "fit_scaler",
    "subsample",
    "assign_folds",
    "synth_generate",
    "GENERATOR_NAMES",
]


class DataError(ValueError):
    """Malformed input data or invalid data-handling parameters."""


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    a = np.array(values, dtype=dtype, order="C", copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """N samples pairing a p-dimensional feature row with a scalar target."""

    features: np.ndarray
    targets: np.ndarray
    name: str = "data"

    def __post_init__(self):
        f = np.array(self.features, dtype=np.float64, order="C", copy=True)
        t = np.array(self.targets, dtype=np.float64, copy=True)
        if f.ndim != 2:
            raise DataError(f"features must be a 2-D matrix, got shape {f.shape}")
        if t.ndim != 1:
            raise DataError(f"targets must be a 1-D vector, got shape {t.shape}")
        n, p = f.shape
        if n < 1 or p < 1:
            raise DataError(f"need at least one sample and one feature, got {n}x{p}")
        if t.shape[0] != n:
            raise DataError(f"{n} feature rows but {t.shape[0]} targets")
        if not np.all(np.isfinite(f)):
            raise DataError("features contain non-finite values")
        if not np.all(np.isfinite(t)):
            raise DataError("targets contain non-finite values")
        f.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "targets", t)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices, name: str | None = None) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.features[idx], self.targets[idx], name or self.name)


@dataclass(frozen=True)
class TargetScaler:
    """Affine map sending [lo, hi] onto [-1, +1]; extrapolates linearly outside."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DataError(f"non-finite scaler range [{self.lo}, {self.hi}]")
        if self.lo >= self.hi:
            raise DataError(f"degenerate scaler range [{self.lo}, {self.hi}]")

    def scale(self, y):
        return (np.asarray(y, dtype=float) - self.lo) * (2.0 / (self.hi - self.lo)) - 1.0

    def inverse(self, z):
        return (np.asarray(z, dtype=float) + 1.0) * ((self.hi - self.lo) / 2.0) + self.lo


def fit_scaler(targets) -> TargetScaler:
    """Scaler with lo/hi at the observed min/max, so scale(min) = -1, scale(max) = +1."""
    t = np.asarray(targets, dtype=float)
    if t.size == 0:
        raise DataError("cannot fit a scaler on empty targets")
    lo, hi = float(t.min()), float(t.max())
    if lo >= hi:
        raise DataError(f"constant targets (all equal {lo}): scaler range is degenerate")
    return TargetScaler(lo, hi)


@dataclass(frozen=True)
class FoldAssignment:
    """Random partition of n samples into k folds whose sizes differ by at most 1."""

    k: int
    membership: np.ndarray

    def __post_init__(self):
        m = np.array(self.membership, dtype=np.intp, copy=True)
        if self.k < 2:
            raise DataError(f"fold count must be >= 2, got {self.k}")
        if m.ndim != 1 or m.size < self.k:
            raise DataError("membership must assign every sample to one of k folds")
        counts = np.bincount(m, minlength=self.k)
        if m.min() < 0 or m.max() >= self.k:
            raise DataError("fold indices out of range")
        if counts.max() - counts.min() > 1:
            raise DataError("fold sizes differ by more than 1")
        m.flags.writeable = False
        object.__setattr__(self, "membership", m)

    @property
    def n_samples(self) -> int:
        return self.membership.shape[0]

    def test_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.membership == fold)[0]

    def train_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.membership != fold)[0]

    def splits(self):
        """Yield (train_indices, test_indices) per fold, in fold order."""
        for fold in range(self.k):
            yield self.train_indices(fold), self.test_indices(fold)


def assign_folds(n: int, k: int, rng) -> FoldAssignment:
    """Randomly assign n samples to k folds; sizes are floor(n/k) or ceil(n/k)."""
    if k < 2:
        raise DataError(f"fold count must be >= 2, got {k}")
    if k > n:
        raise DataError(f"cannot split {n} samples into {k} folds")
    counts = np.full(k, n // k, dtype=np.intp)
    counts[: n % k] += 1
    membership = as_rng(rng).permutation(np.repeat(np.arange(k), counts))
    return FoldAssignment(k, membership)


def subsample(d: Dataset, fraction: float, rng) -> Dataset:
    """Uniform sample without replacement of ceil(fraction * N) rows."""
    if not 0.0 < fraction <= 1.0:
        raise DataError(f"subsample fraction must lie in (0, 1], got {fraction}")
    size = math.ceil(fraction * d.n_samples)
    idx = as_rng(rng).choice(d.n_samples, size=size, replace=False)
    return d.subset(idx)


# --- CSV ---------------------------------------------------------------

def _parse_rows(path: Path):
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: file is empty")
    header = [h.strip() for h in rows[0]]
    parsed = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(
                f"{path}: row at line {lineno} has {len(row)} cells, expected {len(header)}")
        values = []
        for col, cell in zip(header, row):
            try:
                v = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: line {lineno}, column '{col}': cannot parse {cell!r} as a number"
                ) from None
            if not math.isfinite(v):
                raise DataError(f"{path}: line {lineno}, column '{col}': non-finite value {cell!r}")
            values.append(v)
        parsed.append(values)
    if not parsed:
        raise DataError(f"{path}: no data rows after the header")
    return header, parsed


def load_csv(path, target_column: str) -> Dataset:
    """Load a UTF-8 comma-separated file with a header row.

    All columns except `target_column` become features, in file order.
    """
    path = Path(path)
    header, parsed = _parse_rows(path)
    if target_column not in header:
        raise DataError(f"{path}: no column named '{target_column}' in header {header}")
    if len(header) < 2:
        raise DataError(f"{path}: need at least one feature column besides '{target_column}'")
    tcol = header.index(target_column)
    targets = [row[tcol] for row in parsed]
    features = [[v for i, v in enumerate(row) if i != tcol] for row in parsed]
    return Dataset(np.asarray(features), np.asarray(targets), name=path.stem)


def load_feature_csv(path) -> tuple[np.ndarray, list[str]]:
    """Load a feature-only CSV (no target column); returns (matrix, column names)."""
    path = Path(path)
    header, parsed = _parse_rows(path)
    return np.asarray(parsed, dtype=np.float64), header


def save_csv(d: Dataset, path, target_column: str = "y") -> None:
    """Write `d` as CSV (features x1..xp plus the target column).

    Floats are written with full round-trip precision so load_csv restores
    the exact values.
    """
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i + 1}" for i in range(d.n_features)] + [target_column])
        for row, t in zip(d.features, d.targets):
            w.writerow([repr(float(v)) for v in row] + [repr(float(t))])


# --- synthetic generators ----------------------------------------------

LINEAR_COEF = np.array([1.5, -2.0, 0.5, 3.0])
LINEAR_INTERCEPT = 0.7


def _gen_linear(n, rng):
    X = rng.uniform(-2.0, 2.0, size=(n, 4))
    return X, X @ LINEAR_COEF + LINEAR_INTERCEPT


def _gen_piecewise(n, rng):
    X = rng.uniform(-2.0, 2.0, size=(n, 2))
    y = np.where(X[:, 0] > 0.0, 2.0, -1.0) + np.where(X[:, 1] > 0.5, 1.5, 0.0)
    return X, y


def _gen_sine_mix(n, rng):
    X = rng.uniform(-2.0, 2.0, size=(n, 3))
    y = np.sin(2.0 * X[:, 0]) + 0.5 * np.sin(3.0 * X[:, 1] + 1.0) + 0.3 * X[:, 2]
    return X, y


def _gen_heterogeneous(n, rng):
    # Additive mix of a linear trend, a local-neighborhood component (sharp
    # square-wave staircases along two axes), and a smooth rotated sine
    # ridge: learners with different inductive biases each explain a
    # different share, and none captures all three.
    X = rng.uniform(-2.0, 2.0, size=(n, 6))
    linear = 2.0 * X[:, 0] - 1.5 * X[:, 1]
    local = 2.0 * (np.sign(np.sin(2.2 * X[:, 2])) + np.sign(np.sin(2.2 * X[:, 3])))
    smooth = 2.0 * np.sin(1.3 * X[:, 4] + 0.6 * X[:, 5])
    return X, linear + local + smooth


_GENERATORS = {
    "linear": _gen_linear,
    "piecewise": _gen_piecewise,
    "sine-mix": _gen_sine_mix,
    "heterogeneous": _gen_heterogeneous,
}

GENERATOR_NAMES = tuple(sorted(_GENERATORS))


def synth_generate(generator: str, size: int, noise: float, rng) -> Dataset:
    """Generate a synthetic dataset; bit-identical for the same seed."""
    if size < 1:
        raise DataError(f"size must be >= 1, got {size}")
    if noise < 0:
        raise DataError(f"noise level must be >= 0, got {noise}")
    try:
        gen = _GENERATORS[generator]
    except KeyError:
        raise DataError(
            f"unknown generator '{generator}' (choose from {', '.join(GENERATOR_NAMES)})"
        ) from None
    rng = as_rng(rng)
    X, y = gen(size, rng)
    if noise > 0:
        y = y + noise * rng.standard_normal(size)
    return Dataset(X, y, name=f"{generator}-{size}")
