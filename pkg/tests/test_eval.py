import numpy as np
import pytest

from evostack.data import DataError, Dataset, assign_folds, synth_generate
from evostack.evaluation import (
    cross_validate,
    proportional_eval,
    proportional_split,
    rmse,
)
from evostack.learners import KNNSpec, MeanSpec, TrainingError
from evostack.seeding import spawn_rng


class TestRmse:
    def test_perfect_fit(self):
        assert rmse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_hand_computed(self):
        assert rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(np.sqrt(12.5), abs=1e-12)

    def test_constant_at_mean_equals_population_std(self):
        rng = np.random.default_rng(0)
        t = rng.normal(size=500)
        preds = np.full(500, t.mean())
        assert rmse(preds, t) == pytest.approx(float(np.std(t)), abs=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            rmse([1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            rmse([], [])
        with pytest.raises(ValueError):
            rmse([np.nan], [1.0])

    def test_paired_permutation_invariance(self):
        rng = np.random.default_rng(1)
        p = rng.normal(size=50)
        t = rng.normal(size=50)
        perm = rng.permutation(50)
        assert rmse(p, t) == pytest.approx(rmse(p[perm], t[perm]), abs=1e-12)

    def test_scales_linearly(self):
        rng = np.random.default_rng(2)
        p = rng.normal(size=30)
        t = rng.normal(size=30)
        for c in (-3.0, 0.5, 10.0):
            assert rmse(c * p, c * t) == pytest.approx(abs(c) * rmse(p, t), rel=1e-12)


class TestCrossValidate:
    def test_mean_learner_pooled_matches_manual_reconstruction(self):
        rng = np.random.default_rng(3)
        d = Dataset(rng.normal(size=(40, 2)), rng.normal(size=40))
        seed = 17
        report = cross_validate(MeanSpec(), d, 4, seed)
        fa = assign_folds(40, 4, spawn_rng(seed, "folds"))
        preds = np.empty(0)
        truths = np.empty(0)
        for fold in range(4):
            tr, ts = fa.train_indices(fold), fa.test_indices(fold)
            preds = np.concatenate([preds, np.full(ts.size, d.targets[tr].mean())])
            truths = np.concatenate([truths, d.targets[ts]])
        assert report.rmse == rmse(preds, truths)
        assert len(report.per_fold_rmse) == 4

    def test_leave_one_out_nearest_neighbor(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(10, 2))
        y = rng.normal(size=10)
        d = Dataset(X, y)
        report = cross_validate(KNNSpec(1, 0.0, "euclidean"), d, 10, 5,
                                with_reference=False)
        # manual: each sample predicted by its nearest other sample
        preds = np.empty(10)
        for i in range(10):
            others = np.delete(np.arange(10), i)
            dist = np.sqrt(((X[others] - X[i]) ** 2).sum(axis=1))
            preds[i] = y[others[np.argmin(dist)]]
        assert report.rmse == pytest.approx(rmse(preds, y), abs=1e-12)

    def test_mean_cmp_exactly_one_for_mean_learner(self):
        d = synth_generate("linear", 300, 1.0, np.random.default_rng(0))
        report = cross_validate(MeanSpec(), d, 5, 9)
        assert report.mean_cmp == 1.0

    def test_mean_learner_rmse_converges_to_target_std(self):
        tolerances = {100: 0.15, 1000: 0.08, 10000: 0.05}
        for n, tol in tolerances.items():
            d = synth_generate("linear", n, 1.0, np.random.default_rng(1))
            report = cross_validate(MeanSpec(), d, 5, 2, with_reference=False)
            std = float(np.std(d.targets))
            assert abs(report.rmse - std) / std < tol

    def test_fold_count_bounds(self):
        d = synth_generate("linear", 10, 0.0, np.random.default_rng(0))
        with pytest.raises(DataError):
            cross_validate(MeanSpec(), d, 1, 0)
        with pytest.raises(DataError):
            cross_validate(MeanSpec(), d, 11, 0)

    def test_training_failure_names_fold(self):
        rng = np.random.default_rng(5)
        d = Dataset(rng.normal(size=(12, 2)), rng.normal(size=12))
        with pytest.raises(TrainingError, match="fold 0"):
            cross_validate(KNNSpec(11, 0.0, "manhattan"), d, 2, 0)

    def test_deterministic_and_jobs_invariant(self):
        d = synth_generate("sine-mix", 60, 0.3, np.random.default_rng(2))
        spec = KNNSpec(5, 10.0, "euclidean")
        a = cross_validate(spec, d, 3, 7, jobs=1)
        b = cross_validate(spec, d, 3, 7, jobs=2)
        assert a == b

    def test_report_text_and_csv(self):
        d = synth_generate("linear", 50, 1.0, np.random.default_rng(3))
        report = cross_validate(MeanSpec(), d, 5, 21)
        text = report.to_text()
        assert "pooled_rmse:" in text
        assert "mean_cmp: 1.00" in text
        assert "seed: 21" in text
        csv_block = report.to_csv()
        header, row = csv_block.strip().split("\n")
        assert header.startswith("learner,dataset,n,mode")
        assert row.startswith("mean,")


class TestProportionalEval:
    def test_split_sizes_floor_rule(self):
        train, test = proportional_split(12, 0.7, 0)
        assert train.size == 8
        assert test.size == 4
        assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(12))

    def test_report_sizes(self):
        rng = np.random.default_rng(0)
        d = Dataset(rng.normal(size=(12, 2)), rng.normal(size=12))
        report = proportional_eval(MeanSpec(), d, 0.7, 3)
        assert report.n_train == 8
        assert report.mode == "split"
        assert len(report.per_fold_rmse) == 1
        assert report.per_fold_rmse[0] == report.rmse

    def test_perfect_fit_learner(self):
        rng = np.random.default_rng(1)
        d = Dataset(rng.normal(size=(20, 2)), np.full(20, 2.5))
        report = proportional_eval(MeanSpec(), d, 0.7, 5, with_reference=False)
        assert report.rmse == 0.0

    def test_different_seeds_give_different_splits(self):
        splits = {tuple(np.sort(proportional_split(30, 0.7, seed)[0]).tolist())
                  for seed in range(100)}
        assert len(splits) > 90

    def test_degenerate_split_errors(self):
        rng = np.random.default_rng(2)
        d = Dataset(rng.normal(size=(3, 1)), rng.normal(size=3))
        with pytest.raises(DataError):
            proportional_eval(MeanSpec(), d, 0.1, 0)  # zero train rows
        with pytest.raises(DataError):
            proportional_eval(MeanSpec(), d, 1.5, 0)  # ratio out of range
        single = Dataset([[1.0]], [1.0])
        with pytest.raises(DataError):
            proportional_eval(MeanSpec(), single, 0.5, 0)  # n=1 cannot split

    def test_mean_cmp_ratio(self):
        d = synth_generate("heterogeneous", 120, 0.5, np.random.default_rng(4))
        report = proportional_eval(KNNSpec(5, 10.0, "euclidean"), d, 0.7, 8)
        assert report.mean_cmp == pytest.approx(report.reference_rmse / report.rmse)
