"""Classifier suite, splitting, class weighting, metrics, and grid search."""

from .data import (
    LabeledSet,
    Standardizer,
    accuracy,
    class_weights,
    stratified_split,
    weighted_f1,
)
from .mlp import MlpParams, MlpModel, TrainingDivergedError, train_mlp
from .search import GridCandidate, GridSearchReport, grid_search
from .store import load_model, save_model
from .svm import SvmParams, SvmModel, solve_smo, train_svm
from .trees import (
    AdaBoostModel,
    BoostParams,
    ForestParams,
    RandomForestModel,
    train_adaboost,
    train_random_forest,
)

__all__ = [
    "LabeledSet",
    "Standardizer",
    "accuracy",
    "class_weights",
    "stratified_split",
    "weighted_f1",
    "SvmParams",
    "SvmModel",
    "solve_smo",
    "train_svm",
    "MlpParams",
    "MlpModel",
    "TrainingDivergedError",
    "train_mlp",
    "ForestParams",
    "BoostParams",
    "RandomForestModel",
    "AdaBoostModel",
    "train_random_forest",
    "train_adaboost",
    "GridCandidate",
    "GridSearchReport",
    "grid_search",
    "save_model",
    "load_model",
]
