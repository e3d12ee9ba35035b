"""Bagged Gini trees with per-split feature subsampling and vote scores."""

from __future__ import annotations

import math

import numpy as np

from .base import (RANDOM_FOREST, ModelError, ModelSpec, TrainedModel,
                   constant_model_if_single_class)
from .tree import build_classification_tree, predict_class_index


class RandomForestModel(TrainedModel):
    def __init__(self, spec, classes, n_features, trees, oob_masks):
        super().__init__(spec, classes, n_features)
        self.trees = trees
        self.oob_masks = oob_masks      # per tree: bool mask of rows left out of its bootstrap

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        X = self._check_input(X)
        votes = np.zeros((X.shape[0], len(self.classes)))
        for root in self.trees:
            winners = predict_class_index(root, X)
            votes[np.arange(X.shape[0]), winners] += 1.0
        return votes / len(self.trees)


def train_random_forest(X: np.ndarray, y: np.ndarray, spec: ModelSpec
                        ) -> TrainedModel:
    """Trees bootstrap-sampled and grown to purity; each split considers
    ceil(sqrt(d)) candidate features; prediction is the vote fraction."""
    if spec.kind != RANDOM_FOREST:
        raise ModelError(f"spec kind {spec.kind!r} is not {RANDOM_FOREST!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes = np.unique(y)
    constant = constant_model_if_single_class(spec, classes, X.shape[1])
    if constant is not None:
        return constant

    y_idx = np.searchsorted(classes, y)
    n, d = X.shape
    mtry = math.ceil(math.sqrt(d))
    n_trees = int(spec["trees"])
    trees = []
    oob_masks = []
    for t in range(n_trees):
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, t]))
        bootstrap = rng.integers(0, n, size=n)
        oob = np.ones(n, dtype=bool)
        oob[bootstrap] = False
        root = build_classification_tree(X[bootstrap], y_idx[bootstrap],
                                         n_classes=len(classes), rng=rng,
                                         max_features=mtry)
        trees.append(root)
        oob_masks.append(oob)
    return RandomForestModel(spec, classes, d, trees, oob_masks)
