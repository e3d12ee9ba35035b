"""Grid search over model specs with participant-grouped K-fold CV."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..evaluate import confusion_and_f1
from .base import ModelError, ModelSpec


@dataclass
class CvResult:
    best_spec: ModelSpec
    fold_scores: dict[int, list[float]] = field(default_factory=dict)
    # fold_scores[grid index] -> macro-F1 per fold

    def mean_scores(self) -> dict[int, float]:
        return {i: float(np.mean(s)) for i, s in self.fold_scores.items()}


def group_kfold(groups: list[str], n_folds: int, seed: int
                ) -> list[tuple[np.ndarray, np.ndarray]]:
    """Folds that never split one group: shuffled groups go greedily to the
    currently smallest fold, so row counts stay balanced."""
    unique = list(dict.fromkeys(groups))
    if len(unique) < n_folds:
        raise ModelError(f"{len(unique)} groups cannot fill {n_folds} folds")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    order = rng.permutation(len(unique))
    group_sizes = {g: 0 for g in unique}
    for g in groups:
        group_sizes[g] += 1

    fold_members: list[list[str]] = [[] for _ in range(n_folds)]
    fold_sizes = [0] * n_folds
    for gi in order:
        g = unique[gi]
        target = min(range(n_folds), key=lambda f: (fold_sizes[f], f))
        fold_members[target].append(g)
        fold_sizes[target] += group_sizes[g]

    groups_arr = np.asarray(groups)
    folds = []
    for members in fold_members:
        val_mask = np.isin(groups_arr, members)
        folds.append((np.flatnonzero(~val_mask), np.flatnonzero(val_mask)))
    return folds


def grid_search_cv(grid: list[ModelSpec], X: np.ndarray, y: np.ndarray,
                   groups: list[str], folds: int = 10, seed: int = 0,
                   train_fn=None) -> CvResult:
    """Pick the grid spec with the best mean macro-F1 over grouped folds.

    Ties keep the earlier grid entry. A single-spec grid returns at once
    (nothing to choose). ``train_fn(X, y, spec)`` defaults to the standard
    dispatcher; injectable for tests.
    """
    if folds < 2:
        raise ModelError("cross-validation needs at least two folds")
    if not grid:
        raise ModelError("empty model grid")
    if len(grid) == 1:
        return CvResult(best_spec=grid[0])

    if train_fn is None:
        from . import train_model
        train_fn = train_model

    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    splits = group_kfold(list(groups), folds, seed)
    fold_scores: dict[int, list[float]] = {i: [] for i in range(len(grid))}
    for train_idx, val_idx in splits:
        for i, spec in enumerate(grid):
            model = train_fn(X[train_idx], y[train_idx], spec)
            predicted = model.predict(X[val_idx])
            _, macro, _ = confusion_and_f1(y[val_idx], predicted,
                                           classes=list(np.unique(y)))
            fold_scores[i].append(macro)

    means = [float(np.mean(fold_scores[i])) if fold_scores[i] else -1.0
             for i in range(len(grid))]
    best = int(np.argmax(means))        # first maximum = earliest grid entry
    return CvResult(best_spec=grid[best], fold_scores=fold_scores)
