"""Stagewise gradient boosting with multinomial logistic loss.

Each stage fits one depth-capped SSE tree per class to the negative
gradient (label indicator minus softmax probability) and adds its output,
scaled by the learning rate, to that class's margin. Leaf values take the
one-step Newton form for the multinomial loss. Margins start at the class
log-priors, so the stage-zero scores are the training priors.
"""

from __future__ import annotations

import numpy as np

from .base import (GRADIENT_BOOSTING, ModelError, ModelSpec, TrainedModel,
                   constant_model_if_single_class)
from .tree import build_regression_tree, predict_value

_PROB_FLOOR = 1e-12


def _softmax(margins: np.ndarray) -> np.ndarray:
    shifted = margins - margins.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _log_loss(probs: np.ndarray, y_idx: np.ndarray) -> float:
    picked = np.clip(probs[np.arange(len(y_idx)), y_idx], _PROB_FLOOR, None)
    return float(-np.log(picked).mean())


class GradientBoostingModel(TrainedModel):
    def __init__(self, spec, classes, n_features, base_margin, stages,
                 learning_rate, train_loss_history):
        super().__init__(spec, classes, n_features)
        self.base_margin = base_margin          # (K,) log priors
        self.stages = stages                    # list of per-class tree lists
        self.learning_rate = learning_rate
        self.train_loss_history = train_loss_history

    def decision_margins(self, X: np.ndarray) -> np.ndarray:
        X = self._check_input(X)
        margins = np.tile(self.base_margin, (X.shape[0], 1))
        for stage in self.stages:
            for k, root in enumerate(stage):
                margins[:, k] += self.learning_rate * predict_value(root, X)
        return margins

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        return _softmax(self.decision_margins(X))


def _newton_leaf(residuals: np.ndarray, n_classes: int) -> float:
    denom = float((np.abs(residuals) * (1.0 - np.abs(residuals))).sum())
    if denom < 1e-150:
        return 0.0
    return (n_classes - 1) / n_classes * float(residuals.sum()) / denom


def train_gradient_boosting(X: np.ndarray, y: np.ndarray, spec: ModelSpec
                            ) -> TrainedModel:
    if spec.kind != GRADIENT_BOOSTING:
        raise ModelError(f"spec kind {spec.kind!r} is not {GRADIENT_BOOSTING!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes = np.unique(y)
    constant = constant_model_if_single_class(spec, classes, X.shape[1])
    if constant is not None:
        return constant

    n, d = X.shape
    k_classes = len(classes)
    y_idx = np.searchsorted(classes, y)
    onehot = np.zeros((n, k_classes))
    onehot[np.arange(n), y_idx] = 1.0

    priors = onehot.mean(axis=0)
    base_margin = np.log(priors)            # all classes present by construction
    margins = np.tile(base_margin, (n, 1))

    depth = int(spec["depth"])
    lr = float(spec["learning_rate"])
    n_stages = int(spec["trees"])
    stages = []
    probs = _softmax(margins)
    loss_history = [_log_loss(probs, y_idx)]
    for _ in range(n_stages):
        stage = []
        residuals = onehot - probs
        for k in range(k_classes):
            root = build_regression_tree(
                X, residuals[:, k], max_depth=depth,
                leaf_value=lambda t: _newton_leaf(t, k_classes))
            stage.append(root)
            margins[:, k] += lr * predict_value(root, X)
        stages.append(stage)
        probs = _softmax(margins)
        loss_history.append(_log_loss(probs, y_idx))
    return GradientBoostingModel(spec, classes, d, base_margin, stages, lr,
                                 loss_history)
