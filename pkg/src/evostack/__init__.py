"""Regression stacking ensembles: from-scratch base learners, bagging,
stacked generalization, and a genetic algorithm evolving ensemble composition.
"""

from .data import (
    DataError,
    Dataset,
    FoldAssignment,
    TargetScaler,
    assign_folds,
    fit_scaler,
    load_csv,
    load_feature_csv,
    save_csv,
    subsample,
    synth_generate,
)
from .ensembles import (
    BaggingSpec,
    ComposedRegression,
    StackingSpec,
    compose,
    level2_training_set,
    train_bagging,
    train_stacking,
)
from .evaluation import EvalReport, cross_validate, proportional_eval, rmse
from .evolve import (
    EvolutionTrace,
    FitnessEvaluator,
    GAConfig,
    Individual,
    IterationRecord,
    Registry,
    build_basic_registry,
    build_default_registry,
    crossover,
    decode,
    encode,
    enforce_size_limit,
    fitness,
    mutate_head,
    mutate_membership,
    random_individual,
    roulette_select,
    run_ga,
)
from .learners import (
    BaggedNetSpec,
    ForestSpec,
    KNNSpec,
    LearnerSpec,
    MeanSpec,
    NeuralNetSpec,
    PLSSpec,
    RegressionFunction,
    TrainingError,
    train_knn,
    train_mean,
    train_mlp_rprop,
    train_pls,
    train_random_forest,
    train_regression_tree,
)
from .model_io import ModelFormatError, load_model, save_model
from .seeding import as_rng, child_seed, spawn_rng
from .specfile import bundled_hand_tuned_path, load_spec_file, resolve_spec

__version__ = "0.1.0"
