import numpy as np
import pytest

from evostack.data import Dataset
from evostack.learners import (
    KNNSpec,
    MeanRegression,
    train_knn,
    train_mean,
)


def knn_oracle(X, y, q, k, alpha, metric):
    """All-pairs reference: raw 1/d**alpha weights, (distance, index) ties."""
    if metric == "manhattan":
        d = np.abs(X - q).sum(axis=1)
    else:
        d = np.sqrt(((X - q) ** 2).sum(axis=1))
    order = sorted(range(len(d)), key=lambda i: (d[i], i))[:k]
    dd = d[order]
    yy = y[order]
    if (dd == 0).any():
        return float(yy[dd == 0].mean())
    if alpha == 0:
        return float(yy.mean())
    w = 1.0 / dd ** alpha
    return float((w @ yy) / w.sum())


class TestMean:
    def test_mean_of_targets(self):
        d = Dataset([[0.0], [0.0], [0.0]], [2.0, 4.0, 6.0])
        m = train_mean(d)
        assert m.predict_one([123.0]) == 4.0

    def test_single_sample(self):
        m = train_mean(Dataset([[1.0]], [5.0]))
        assert m.predict_one([-3.0]) == 5.0

    def test_uniform_rank_design(self):
        ranks = np.repeat(np.arange(1.0, 27.0), 120)
        d = Dataset(np.zeros((ranks.size, 1)), ranks)
        assert train_mean(d).predict_one([0.0]) == pytest.approx(13.5, abs=1e-12)

    def test_constant_regardless_of_input(self):
        d = Dataset([[1.0, 2.0], [3.0, 4.0]], [1.0, 3.0])
        m = train_mean(d)
        out = m.predict(np.array([[0.0, 0.0], [100.0, -7.0]]))
        assert out.tolist() == [2.0, 2.0]


class TestKNN:
    def test_weighted_two_neighbors(self):
        d = Dataset([[1.0], [2.0]], [0.0, 3.0])
        m = train_knn(d, 2, 1.0, "manhattan")
        # weights 1/1 and 1/2 -> (0 + 1.5) / 1.5
        assert m.predict_one([0.0]) == pytest.approx(1.0, abs=1e-12)

    def test_alpha_zero_is_plain_average(self):
        d = Dataset([[1.0], [2.0]], [0.0, 3.0])
        m = train_knn(d, 2, 0.0, "manhattan")
        assert m.predict_one([0.0]) == pytest.approx(1.5, abs=1e-12)

    def test_exact_match_dominates(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(20, 3))
        y = rng.normal(size=20)
        for alpha in (0.0, 1.0, 7.0, 20.0):
            m = train_knn(Dataset(X, y), 5, alpha, "euclidean")
            assert m.predict_one(X[13]) == pytest.approx(y[13], abs=1e-12)

    def test_multiple_exact_matches_average_unweighted(self):
        X = np.array([[1.0], [1.0], [5.0]])
        y = np.array([2.0, 4.0, 100.0])
        m = train_knn(Dataset(X, y), 3, 3.0, "manhattan")
        assert m.predict_one([1.0]) == pytest.approx(3.0, abs=1e-12)

    def test_k1_returns_nearest_target(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(30, 2))
        y = rng.normal(size=30)
        m = train_knn(Dataset(X, y), 1, 2.0, "euclidean")
        for q in rng.normal(size=(10, 2)):
            d = np.sqrt(((X - q) ** 2).sum(axis=1))
            assert m.predict_one(q) == pytest.approx(y[np.argmin(d)], abs=1e-12)

    def test_distance_ties_broken_by_index(self):
        X = np.array([[1.0], [-1.0], [1.0], [-1.0]])
        y = np.array([10.0, 20.0, 30.0, 40.0])
        m = train_knn(Dataset(X, y), 2, 0.0, "manhattan")
        # all four neighbors at distance 1; lowest indices 0 and 1 win
        assert m.predict_one([0.0]) == pytest.approx(15.0)

    def test_alpha_zero_equals_unweighted_oracle(self):
        rng = np.random.default_rng(42)
        X = rng.uniform(size=(40, 3))
        y = rng.normal(size=40)
        m = train_knn(Dataset(X, y), 7, 0.0, "euclidean")
        for q in rng.uniform(size=(100, 3)):
            assert m.predict_one(q) == pytest.approx(
                knn_oracle(X, y, q, 7, 0.0, "euclidean"), abs=1e-10)

    @pytest.mark.parametrize("metric", ["manhattan", "euclidean"])
    def test_matches_all_pairs_oracle(self, metric):
        rng = np.random.default_rng(7)
        for _ in range(30):
            n = int(rng.integers(5, 50))
            p = int(rng.integers(1, 6))
            X = rng.uniform(size=(n, p))
            y = rng.normal(size=n)
            k = int(rng.integers(1, n + 1))
            alpha = float(rng.choice([0.0, 1.0, 10.0, 20.0]))
            m = train_knn(Dataset(X, y), k, alpha, metric)
            q = rng.uniform(size=p)
            expect = knn_oracle(X, y, q, k, alpha, metric)
            assert m.predict_one(q) == pytest.approx(expect, abs=1e-10)

    def test_huge_alpha_stays_finite(self):
        X = np.array([[0.0], [1e-8], [1.0]])
        y = np.array([5.0, 7.0, 100.0])
        m = train_knn(Dataset(X, y), 3, 20.0, "manhattan")
        v = m.predict_one([1e-8])  # exact match on row 1
        assert v == pytest.approx(7.0)
        v2 = m.predict_one([2e-8])  # nearest at 1e-8, others drowned out
        assert np.isfinite(v2)
        assert v2 == pytest.approx(7.0, abs=1e-3)

    def test_k_bounds(self):
        d = Dataset([[1.0], [2.0]], [0.0, 1.0])
        with pytest.raises(ValueError):
            train_knn(d, 0, 1.0, "manhattan")
        with pytest.raises(ValueError):
            train_knn(d, 3, 1.0, "manhattan")

    def test_bad_metric(self):
        with pytest.raises(ValueError):
            train_knn(Dataset([[1.0]], [1.0]), 1, 1.0, "cosine")
        with pytest.raises(ValueError):
            KNNSpec(3, 1.0, "cosine")

    def test_spec_name(self):
        assert KNNSpec(50, 20.0, "manhattan").name == "knn_k50_a20_manhattan"

    def test_batch_matches_single(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(25, 2))
        y = rng.normal(size=25)
        m = train_knn(Dataset(X, y), 4, 10.0, "manhattan")
        Q = rng.normal(size=(9, 2))
        batch = m.predict(Q)
        assert batch.tolist() == [m.predict_one(q) for q in Q]


class TestPredictContract:
    def test_dimension_check(self):
        m = MeanRegression(1.0, 3)
        with pytest.raises(ValueError, match=r"\(n, 3\)"):
            m.predict(np.zeros((2, 2)))

    def test_finite_outputs(self):
        rng = np.random.default_rng(2)
        d = Dataset(rng.normal(size=(30, 4)), rng.normal(size=30))
        for model in (train_mean(d), train_knn(d, 5, 10.0, "euclidean")):
            out = model.predict(rng.normal(size=(50, 4)) * 100)
            assert np.all(np.isfinite(out))
