"""Batch command-line front end.

Subcommands: `registry` (list the base-learner grid), `synth` (generate a
synthetic dataset CSV), `eval` (cross-validate or split-evaluate a learner),
`evolve` (run the genetic search), `train` / `predict` (fit a model to CSV
data, save it, apply it later).

All randomness flows from one `--seed` per invocation (default 0); output
artifacts echo every parameter that determines the result, carry no
timestamps, and are byte-identical across reruns and `--jobs` settings.
Exit codes: 0 success, 2 usage error, 3 data/input error, 4 training failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from pathlib import Path

from .data import (
    DataError,
    GENERATOR_NAMES,
    load_csv,
    load_feature_csv,
    save_csv,
    subsample,
    synth_generate,
)
from .ensembles import StackingSpec
from .evaluation import cross_validate, proportional_eval
from .evolve import GAConfig, build_basic_registry, build_default_registry, encode, run_ga
from .learners import TrainingError
from .model_io import ModelFormatError, load_model, save_model
from .seeding import spawn_rng
from .specfile import load_spec_file, resolve_spec

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_TRAIN = 4

DEFAULT_SEED = 0

_REGISTRIES = {"full": build_default_registry, "basic": build_basic_registry}


@contextmanager
def _stage(label: str):
    """Prefix data/training errors with the failing stage."""
    try:
        yield
    except (DataError, ModelFormatError) as exc:
        raise type(exc)(f"{label}: {exc}") from exc
    except TrainingError as exc:
        raise TrainingError(f"{label}: {exc}") from exc


def _echo_lines(pairs) -> str:
    return "\n".join(f"{key}: {value}" for key, value in pairs) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# --- commands -----------------------------------------------------------

def cmd_registry(args) -> int:
    registry = _REGISTRIES[args.registry]()
    for i, spec in enumerate(registry, start=1):
        print(f"{i:>3} {spec.name}")
    return EXIT_OK


def cmd_synth(args) -> int:
    with _stage("generating dataset"):
        data = synth_generate(args.generator, args.size, args.noise,
                              spawn_rng(args.seed, "synth"))
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        save_csv(data, out, target_column=args.target)
    meta = {
        "command": "synth",
        "generator": args.generator,
        "size": args.size,
        "noise": args.noise,
        "seed": args.seed,
        "target": args.target,
        "out": str(out),
    }
    _write(Path(str(out) + ".meta.json"), json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote {data.n_samples} samples x {data.n_features} features to {out}")
    print(f"seed: {args.seed}")
    return EXIT_OK


def cmd_eval(args) -> int:
    with _stage("loading dataset"):
        data = load_csv(args.data, args.target)
    registry = build_default_registry()
    with _stage("resolving learner spec"):
        spec = resolve_spec(args.spec, registry)
    with _stage("evaluating"):
        if args.mode == "cv":
            report = cross_validate(spec, data, args.folds, args.seed, jobs=args.jobs)
        else:
            report = proportional_eval(spec, data, args.ratio, args.seed)
    echo = _echo_lines([
        ("command", "eval"),
        ("data", args.data),
        ("target", args.target),
        ("spec", args.spec),
        ("mode", args.mode),
    ])
    text = echo + report.to_text()
    if args.out:
        out = Path(args.out)
        _write(out / "report.txt", text)
        _write(out / "report.csv", report.to_csv())
    print(text, end="")
    return EXIT_OK


def cmd_evolve(args) -> int:
    with _stage("loading dataset"):
        data = load_csv(args.data, args.target)
    if args.subsample is not None:
        with _stage("sub-sampling dataset"):
            data = subsample(data, args.subsample, spawn_rng(args.seed, "subsample"))
    registry = _REGISTRIES[args.registry]()
    with _stage("configuring the GA"):
        try:
            config = GAConfig(
                population_size=args.pop_size,
                elite_size=args.elite,
                max_iterations=args.iterations,
                head_mutation_prob=args.head_mutation_prob,
                bit_mutation_prob=args.bit_mutation_prob,
                size_limit=args.size_limit,
                fitness_mode=args.fitness_mode,
                fitness_folds=args.fitness_folds,
                train_ratio=args.ratio,
                seed=args.seed,
            )
        except ValueError as exc:
            raise DataError(str(exc)) from None
    seed_genomes = []
    if args.seed_spec:
        with _stage("loading seed genome spec"):
            seed_spec = load_spec_file(args.seed_spec, registry)
            if not isinstance(seed_spec, StackingSpec):
                raise DataError(f"{args.seed_spec}: seed genomes must be stacking specs")
            try:
                seed_genomes.append(encode(seed_spec, registry))
            except ValueError as exc:
                raise DataError(f"{args.seed_spec}: {exc}") from None
    with _stage("running the GA"):
        trace = run_ga(data, config, registry, seed_genomes=seed_genomes, jobs=args.jobs)

    echo = _echo_lines([
        ("command", "evolve"),
        ("data", args.data),
        ("target", args.target),
        ("n_samples", data.n_samples),
        ("n_features", data.n_features),
        ("registry", f"{args.registry} ({len(registry)} entries)"),
        ("population_size", config.population_size),
        ("elite_size", config.elite_size),
        ("iterations", config.max_iterations),
        ("head_mutation_prob", config.head_mutation_prob),
        ("bit_mutation_prob", config.bit_mutation_prob),
        ("size_limit", config.size_limit),
        ("fitness_mode", config.fitness_mode),
        ("fitness_folds", config.fitness_folds),
        ("train_ratio", config.train_ratio),
        ("subsample", args.subsample),
        ("seed_spec", args.seed_spec),
        ("seed", config.seed),
    ])
    best_text = echo + "\n" + trace.describe_best(registry)
    out = Path(args.out)
    _write(out / "trace.csv", trace.to_csv())
    _write(out / "best_genome.txt", best_text)
    print(best_text, end="")
    print(f"trace: {out / 'trace.csv'}")
    return EXIT_OK


def cmd_train(args) -> int:
    with _stage("loading dataset"):
        data = load_csv(args.data, args.target)
    registry = build_default_registry()
    with _stage("resolving learner spec"):
        spec = resolve_spec(args.spec, registry)
    with _stage("training"):
        model = spec.train(data, spawn_rng(args.seed, "train"))
    metadata = {
        "command": "train",
        "data": str(args.data),
        "target": args.target,
        "spec": args.spec,
        "learner": spec.name,
        "seed": args.seed,
        "n_features": model.n_features,
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(out, model, metadata)
    print(f"saved model '{spec.name}' (p={model.n_features}) to {out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    with _stage("loading model"):
        model, metadata = load_model(args.model)
    with _stage("loading features"):
        X, _columns = load_feature_csv(args.data)
    if X.shape[1] != model.n_features:
        raise DataError(
            f"dimension mismatch: model expects p={model.n_features}, "
            f"input has p={X.shape[1]}")
    with _stage("predicting"):
        predictions = model.predict(X)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = ["prediction"] + [repr(float(v)) for v in predictions]
    _write(out, "\n".join(lines) + "\n")
    meta = {
        "command": "predict",
        "model": str(args.model),
        "model_metadata": metadata,
        "data": str(args.data),
        "n_rows": int(X.shape[0]),
        "out": str(out),
    }
    _write(Path(str(out) + ".meta.json"), json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote {X.shape[0]} predictions to {out}")
    return EXIT_OK


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evostack",
        description="Regression stacking ensembles and the genetic search over them.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("registry", help="list the base-learner grid")
    p.add_argument("--registry", choices=sorted(_REGISTRIES), default="full")
    p.set_defaults(func=cmd_registry)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--generator", required=True, choices=GENERATOR_NAMES)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--target", default="y", help="target column name (default y)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="evaluate a learner on a dataset")
    p.add_argument("--data", required=True, help="input CSV path")
    p.add_argument("--target", required=True, help="target column name")
    p.add_argument("--spec", required=True,
                   help="registry name, 1-based registry index, or spec-file path")
    p.add_argument("--mode", choices=("cv", "split"), default="cv")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--ratio", type=float, default=0.7, help="train ratio in split mode")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None, help="output directory for report files")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("evolve", help="evolve a stacking ensemble with the GA")
    p.add_argument("--data", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--registry", choices=sorted(_REGISTRIES), default="full")
    p.add_argument("--pop-size", type=int, default=16)
    p.add_argument("--elite", type=int, default=1)
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--head-mutation-prob", type=float, default=0.2)
    p.add_argument("--bit-mutation-prob", type=float, default=0.5)
    p.add_argument("--size-limit", type=int, default=None)
    p.add_argument("--fitness-mode", choices=("cv", "split"), default="cv")
    p.add_argument("--fitness-folds", type=int, default=5)
    p.add_argument("--ratio", type=float, default=0.7,
                   help="train ratio for split fitness mode")
    p.add_argument("--subsample", type=float, default=None,
                   help="fitness data fraction taken once before the run")
    p.add_argument("--seed-spec", default=None,
                   help="stacking spec file seeding the initial population")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("train", help="train a learner and save the model")
    p.add_argument("--data", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True, help="model file path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a saved model to feature rows")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="feature-only CSV (no target column)")
    p.add_argument("--out", required=True, help="prediction CSV path")
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DataError, ModelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRAIN


if __name__ == "__main__":
    sys.exit(main())
