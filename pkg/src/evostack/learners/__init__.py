"""Base-learner families: mean, k-NN, PLS, regression trees / random forests,
and RPROP-trained neural nets (plain and bagged)."""

from .base import (
    AveragePredictor,
    LearnerSpec,
    RegressionFunction,
    TrainingError,
    train_bagged,
)
from .knn import METRICS, KNNRegression, KNNSpec, train_knn
from .mean import MeanRegression, MeanSpec, train_mean
from .neural import (
    BaggedNetSpec,
    MLPRegression,
    NeuralNetSpec,
    forward,
    mse,
    mse_and_gradients,
    train_mlp_rprop,
)
from .pls import PLSRegression, PLSSpec, train_pls
from .tree import (
    ForestRegression,
    ForestSpec,
    RegressionTree,
    TreeLeaf,
    TreeNode,
    default_mtry,
    train_random_forest,
    train_regression_tree,
)

__all__ = [
    "AveragePredictor",
    "BaggedNetSpec",
    "ForestRegression",
    "ForestSpec",
    "KNNRegression",
    "KNNSpec",
    "LearnerSpec",
    "METRICS",
    "MLPRegression",
    "MeanRegression",
    "MeanSpec",
    "NeuralNetSpec",
    "PLSRegression",
    "PLSSpec",
    "RegressionFunction",
    "RegressionTree",
    "TrainingError",
    "TreeLeaf",
    "TreeNode",
    "default_mtry",
    "forward",
    "mse",
    "mse_and_gradients",
    "train_bagged",
    "train_knn",
    "train_mean",
    "train_mlp_rprop",
    "train_pls",
    "train_random_forest",
    "train_regression_tree",
]
