import json

import numpy as np
import pytest

from evostack.cli import EXIT_DATA, EXIT_OK, EXIT_TRAIN, main
from evostack.data import load_csv, save_csv, synth_generate
from evostack.model_io import load_model
from evostack.specfile import bundled_hand_tuned_path


def run(*argv):
    return main(list(argv))


@pytest.fixture()
def small_csv(tmp_path):
    d = synth_generate("sine-mix", 80, 0.3, np.random.default_rng(1))
    path = tmp_path / "train.csv"
    save_csv(d, path)
    return path


class TestRegistry:
    def test_lists_104_entries(self, capsys):
        assert run("registry") == EXIT_OK
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 104
        assert lines[0].split() == ["1", "mean"]
        names = [line.split()[1] for line in lines]
        assert len(set(names)) == 104

    def test_basic_preset(self, capsys):
        assert run("registry", "--registry", "basic") == EXIT_OK
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 13


class TestSynth:
    def test_round_trip_and_meta(self, tmp_path, capsys):
        out = tmp_path / "synth.csv"
        code = run("synth", "--generator", "linear", "--size", "50",
                   "--noise", "0.5", "--seed", "9", "--out", str(out))
        assert code == EXIT_OK
        d = load_csv(out, "y")
        assert d.n_samples == 50
        meta = json.loads((tmp_path / "synth.csv.meta.json").read_text())
        assert meta["seed"] == 9
        assert meta["generator"] == "linear"

    def test_identical_bytes_for_same_seed(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run("synth", "--generator", "heterogeneous", "--size", "40",
            "--noise", "1.0", "--seed", "3", "--out", str(a))
        run("synth", "--generator", "heterogeneous", "--size", "40",
            "--noise", "1.0", "--seed", "3", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_usage_error_is_systemexit_2(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            run("synth", "--generator", "nope", "--size", "10",
                "--out", str(tmp_path / "x.csv"))
        assert err.value.code == 2


class TestEval:
    def test_mean_report_files(self, tmp_path, small_csv, capsys):
        out = tmp_path / "report"
        code = run("eval", "--data", str(small_csv), "--target", "y",
                   "--spec", "mean", "--folds", "4", "--seed", "5",
                   "--out", str(out))
        assert code == EXIT_OK
        text = (out / "report.txt").read_text()
        assert "mean_cmp: 1.00" in text
        assert "seed: 5" in text
        csv_text = (out / "report.csv").read_text()
        assert csv_text.startswith("learner,dataset,n,mode")

    def test_rerun_bit_identical(self, tmp_path, small_csv):
        a, b = tmp_path / "r1", tmp_path / "r2"
        args = ["eval", "--data", str(small_csv), "--target", "y",
                "--spec", "pls_l2", "--folds", "3", "--seed", "11"]
        run(*args, "--out", str(a))
        run(*args, "--out", str(b))
        assert (a / "report.txt").read_bytes() == (b / "report.txt").read_bytes()
        assert (a / "report.csv").read_bytes() == (b / "report.csv").read_bytes()

    def test_missing_file_names_path(self, tmp_path, capsys):
        code = run("eval", "--data", str(tmp_path / "absent.csv"), "--target", "y",
                   "--spec", "mean")
        assert code == EXIT_DATA
        err = capsys.readouterr().err
        assert "absent.csv" in err
        assert "loading dataset" in err

    def test_unknown_spec_is_data_error(self, small_csv, capsys):
        code = run("eval", "--data", str(small_csv), "--target", "y",
                   "--spec", "not_a_learner")
        assert code == EXIT_DATA
        assert "resolving learner spec" in capsys.readouterr().err

    def test_training_failure_exit_code(self, small_csv, capsys):
        # knn with k larger than any training fold
        code = run("eval", "--data", str(small_csv), "--target", "y",
                   "--spec", "knn_k60_a10_manhattan", "--folds", "2")
        assert code == EXIT_TRAIN
        assert "fold" in capsys.readouterr().err

    def test_split_mode(self, small_csv, capsys):
        code = run("eval", "--data", str(small_csv), "--target", "y",
                   "--spec", "mean", "--mode", "split", "--ratio", "0.7",
                   "--seed", "2")
        assert code == EXIT_OK
        assert "proportional split" in capsys.readouterr().out

    def test_spec_file_and_index_selectors(self, tmp_path, small_csv):
        spec_path = tmp_path / "bag.json"
        spec_path.write_text(json.dumps(
            {"kind": "bagging", "base": "pls_l2", "t": 3}))
        assert run("eval", "--data", str(small_csv), "--target", "y",
                   "--spec", str(spec_path), "--folds", "3") == EXIT_OK
        assert run("eval", "--data", str(small_csv), "--target", "y",
                   "--spec", "2", "--folds", "3") == EXIT_OK

    def test_bundled_hand_tuned_beats_mean_over_five_seeds(self, tmp_path, capsys):
        for seed in range(5):
            d = synth_generate("heterogeneous", 250, 1.0, np.random.default_rng(seed))
            csv_path = tmp_path / f"het{seed}.csv"
            save_csv(d, csv_path)
            code = run("eval", "--data", str(csv_path), "--target", "y",
                       "--spec", str(bundled_hand_tuned_path()), "--folds", "3",
                       "--seed", str(seed), "--jobs", "2")
            assert code == EXIT_OK
            out = capsys.readouterr().out
            pooled = float(out.split("pooled_rmse: ")[1].split("\n")[0])
            reference = float(out.split("mean_reference_rmse: ")[1].split("\n")[0])
            assert pooled < reference


class TestEvolve:
    def evolve_args(self, data, out, seed="7", jobs="1"):
        return ["evolve", "--data", str(data), "--target", "y",
                "--registry", "basic", "--pop-size", "4", "--elite", "1",
                "--iterations", "2", "--size-limit", "3",
                "--fitness-folds", "3", "--seed", seed, "--jobs", jobs,
                "--out", str(out)]

    @pytest.fixture()
    def medium_csv(self, tmp_path):
        d = synth_generate("heterogeneous", 250, 1.0, np.random.default_rng(4))
        path = tmp_path / "het.csv"
        save_csv(d, path)
        return path

    def test_trace_rows_equal_iterations(self, tmp_path, medium_csv, capsys):
        out = tmp_path / "run"
        assert run(*self.evolve_args(medium_csv, out)) == EXIT_OK
        lines = (out / "trace.csv").read_text().strip().split("\n")
        assert lines[0] == "iteration,best_rmse,mean_rmse,best_genome"
        assert len(lines) == 3
        best = (out / "best_genome.txt").read_text()
        assert "seed: 7" in best
        assert "level2:" in best

    def test_bit_identical_rerun_and_jobs(self, tmp_path, medium_csv):
        outs = [tmp_path / f"run{i}" for i in range(3)]
        run(*self.evolve_args(medium_csv, outs[0], jobs="1"))
        run(*self.evolve_args(medium_csv, outs[1], jobs="1"))
        run(*self.evolve_args(medium_csv, outs[2], jobs="2"))
        ref_trace = (outs[0] / "trace.csv").read_bytes()
        ref_best = (outs[0] / "best_genome.txt").read_bytes()
        for out in outs[1:]:
            assert (out / "trace.csv").read_bytes() == ref_trace
            assert (out / "best_genome.txt").read_bytes() == ref_best

    def test_seed_spec_accepted(self, tmp_path, medium_csv):
        out = tmp_path / "seeded"
        args = self.evolve_args(medium_csv, out)
        args += ["--seed-spec", str(bundled_hand_tuned_path()), "--subsample", "0.8"]
        assert run(*args) == EXIT_OK
        assert (out / "trace.csv").exists()

    def test_bad_config_is_data_error(self, tmp_path, medium_csv, capsys):
        args = self.evolve_args(medium_csv, tmp_path / "x")
        args[args.index("--pop-size") + 1] = "1"
        assert run(*args) == EXIT_DATA
        assert "configuring the GA" in capsys.readouterr().err


class TestTrainPredict:
    def test_round_trip_reproduces_in_sample_predictions(self, tmp_path, small_csv, capsys):
        model_path = tmp_path / "model.bin"
        assert run("train", "--data", str(small_csv), "--target", "y",
                   "--spec", "pls_l2", "--seed", "3",
                   "--out", str(model_path)) == EXIT_OK
        model, meta = load_model(model_path)
        assert meta["seed"] == 3

        features_path = tmp_path / "features.csv"
        d = load_csv(small_csv, "y")
        lines = [",".join(f"x{i+1}" for i in range(d.n_features))]
        lines += [",".join(repr(float(v)) for v in row) for row in d.features]
        features_path.write_text("\n".join(lines) + "\n")

        preds_path = tmp_path / "preds.csv"
        assert run("predict", "--model", str(model_path), "--data",
                   str(features_path), "--out", str(preds_path)) == EXIT_OK
        rows = preds_path.read_text().strip().split("\n")
        assert rows[0] == "prediction"
        got = np.array([float(v) for v in rows[1:]])
        assert np.array_equal(got, model.predict(d.features))
        meta = json.loads((tmp_path / "preds.csv.meta.json").read_text())
        assert meta["n_rows"] == d.n_samples

    def test_dimension_mismatch_names_both(self, tmp_path, small_csv, capsys):
        model_path = tmp_path / "model.bin"
        run("train", "--data", str(small_csv), "--target", "y",
            "--spec", "mean", "--out", str(model_path))
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        code = run("predict", "--model", str(model_path), "--data", str(bad),
                   "--out", str(tmp_path / "p.csv"))
        assert code == EXIT_DATA
        err = capsys.readouterr().err
        assert "p=3" in err and "p=2" in err

    def test_stacking_spec_file_round_trip(self, tmp_path, small_csv):
        spec_path = tmp_path / "stack.json"
        spec_path.write_text(json.dumps({
            "kind": "stacking", "folds": 3, "level2": "pls_l2",
            "ensemble": ["mean", "pls_l2", "knn_k10_a10_manhattan"]}))
        model_path = tmp_path / "stack.bin"
        assert run("train", "--data", str(small_csv), "--target", "y",
                   "--spec", str(spec_path), "--seed", "2",
                   "--out", str(model_path)) == EXIT_OK
        model, _ = load_model(model_path)
        d = load_csv(small_csv, "y")
        assert np.all(np.isfinite(model.predict(d.features)))
