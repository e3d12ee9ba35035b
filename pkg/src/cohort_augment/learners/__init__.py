import numpy as np

from .base import (DEFAULT_HYPERPARAMETERS, GRADIENT_BOOSTING, KINDS, MLP,
                   ModelError, ModelSpec, RANDOM_FOREST, SVM_RBF,
                   TrainedModel, load_model, save_model)
from .boosting import GradientBoostingModel, train_gradient_boosting
from .forest import RandomForestModel, train_random_forest
from .grid import CvResult, grid_search_cv, group_kfold
from .mlp import MlpModel, TrainingDivergedError, train_mlp
from .svm import ConvergenceError, SvmRbfModel, train_svm_rbf

_TRAINERS = {
    RANDOM_FOREST: train_random_forest,
    GRADIENT_BOOSTING: train_gradient_boosting,
    SVM_RBF: train_svm_rbf,
    MLP: train_mlp,
}


def train_model(X: np.ndarray, y: np.ndarray, spec: ModelSpec) -> TrainedModel:
    """Dispatch to the trainer for spec.kind."""
    return _TRAINERS[spec.kind](X, y, spec)


def predict_scores(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Per-class score matrix; rows sum to one."""
    return model.predict_scores(X)


__all__ = [
    "CvResult", "ConvergenceError", "DEFAULT_HYPERPARAMETERS",
    "GRADIENT_BOOSTING", "GradientBoostingModel", "KINDS", "MLP", "MlpModel",
    "ModelError", "ModelSpec", "RANDOM_FOREST", "RandomForestModel", "SVM_RBF",
    "SvmRbfModel", "TrainedModel", "TrainingDivergedError", "grid_search_cv",
    "group_kfold", "load_model", "predict_scores", "save_model", "train_model",
    "train_gradient_boosting", "train_mlp", "train_random_forest",
    "train_svm_rbf",
]
