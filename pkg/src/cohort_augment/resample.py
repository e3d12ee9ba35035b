"""Adaptive synthetic oversampling of the minority class (ADASYN).

The synthesis budget G = (majority - minority) * beta is spread over
minority points in proportion to how many majority points sit among each
point's k nearest neighbors, so points near the decision boundary receive
more synthetic company. Each synthetic row interpolates its seed point
toward one of the seed's k nearest *minority* neighbors:
``s = x_i + lambda * (x_z - x_i)`` with lambda uniform on [0, 1].

Neighbor queries run on z-scored columns (statistics from the given data,
which is the training split at pipeline level); synthesis happens in the
original feature space. Per-point RNG substreams keyed by (seed, point
index) make the output independent of processing order. Integer allocation
uses largest-remainder rounding so the g_i sum to G exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ResampleError(ValueError):
    pass


@dataclass(frozen=True)
class AdasynParams:
    beta: float = 1.0        # 1 = fully balanced after resampling
    k: int = 5               # neighbors for both density and partner queries
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ResampleError(f"beta {self.beta} outside [0, 1]")
        if self.k < 1:
            raise ResampleError("k must be a positive integer")


@dataclass
class ResampleOutcome:
    features: np.ndarray             # originals first (verbatim), then synthetic
    labels: np.ndarray
    synthetic_flags: np.ndarray      # bool per row
    per_seed_counts: dict[int, int]  # minority row index -> g_i
    seed_rows: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    # seed_rows[j] = original row index that spawned synthetic row j


def k_nearest(points: np.ndarray, query_index: int, k: int) -> list[int]:
    """Indices of the k nearest points (Euclidean), excluding the query.

    Ties break by ascending index; duplicates of the query are legal and
    sort first at distance zero.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if not 0 <= query_index < n:
        raise ResampleError(f"query index {query_index} out of range")
    if k >= n:
        raise ResampleError(f"k={k} must be smaller than the number of points ({n})")
    if np.isnan(points).any():
        raise ResampleError("NaN coordinates in neighbor search")
    deltas = points - points[query_index]
    dist2 = np.einsum("ij,ij->i", deltas, deltas)
    candidates = [i for i in range(n) if i != query_index]
    candidates.sort(key=lambda i: (dist2[i], i))
    return candidates[:k]


def _largest_remainder(weights: np.ndarray, total: int) -> np.ndarray:
    """Integer allocation of ``total`` proportional to weights, exact sum."""
    raw = weights * total
    base = np.floor(raw).astype(int)
    shortfall = total - int(base.sum())
    if shortfall > 0:
        remainders = raw - base
        order = sorted(range(len(weights)), key=lambda i: (-remainders[i], i))
        for i in order[:shortfall]:
            base[i] += 1
    return base


def _synthesize(X: np.ndarray, minority_mask: np.ndarray, params: AdasynParams,
                budget: int) -> tuple[np.ndarray, np.ndarray, dict[int, int]]:
    """Core ADASYN synthesis: returns (synthetic rows, seed row indices, g_i)."""
    minority_rows = np.flatnonzero(minority_mask)
    if len(minority_rows) < 2:
        raise ResampleError("minority class needs at least two members")
    if params.k >= X.shape[0]:
        raise ResampleError(f"k={params.k} too large for {X.shape[0]} training rows")

    # z-score for the metric only; constant columns fall back to unit scale
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    Z = (X - mean) / std

    ratios = np.empty(len(minority_rows))
    for idx, row in enumerate(minority_rows):
        neighbors = k_nearest(Z, int(row), params.k)
        ratios[idx] = (~minority_mask[neighbors]).sum() / params.k
    if ratios.sum() == 0.0:
        # interior minority cloud: no majority neighbors anywhere; spread evenly
        weights = np.full(len(minority_rows), 1.0 / len(minority_rows))
    else:
        weights = ratios / ratios.sum()
    g_per_point = _largest_remainder(weights, budget)

    Z_min = Z[minority_rows]
    k_partner = min(params.k, len(minority_rows) - 1)
    synthetic = np.empty((budget, X.shape[1]))
    seed_rows = np.empty(budget, dtype=int)
    cursor = 0
    for idx, row in enumerate(minority_rows):
        g_i = int(g_per_point[idx])
        if g_i == 0:
            continue
        partners = k_nearest(Z_min, idx, k_partner)
        rng = np.random.default_rng(np.random.SeedSequence([params.seed, idx]))
        for _ in range(g_i):
            partner_row = int(minority_rows[partners[int(rng.integers(len(partners)))]])
            lam = rng.random()
            synthetic[cursor] = X[row] + lam * (X[partner_row] - X[row])
            seed_rows[cursor] = row
            cursor += 1
    per_seed = {int(minority_rows[i]): int(g_per_point[i])
                for i in range(len(minority_rows)) if g_per_point[i] > 0}
    return synthetic, seed_rows, per_seed


def adasyn(X: np.ndarray, y: np.ndarray, params: AdasynParams) -> ResampleOutcome:
    """Oversample the minority class of a binary problem to balance level beta."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ResampleError("X must be 2-D with one label per row")
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) != 2:
        raise ResampleError(f"adasyn is binary-only, got {len(classes)} classes")
    minority_class = classes[np.argmin(counts)]
    budget = int(round((counts.max() - counts.min()) * params.beta))
    if budget == 0:
        return ResampleOutcome(features=X.copy(), labels=y.copy(),
                               synthetic_flags=np.zeros(len(y), dtype=bool),
                               per_seed_counts={},
                               seed_rows=np.empty(0, dtype=int))
    synthetic, seed_rows, per_seed = _synthesize(X, y == minority_class,
                                                 params, budget)
    return ResampleOutcome(
        features=np.vstack([X, synthetic]),
        labels=np.concatenate([y, np.full(budget, minority_class, dtype=y.dtype)]),
        synthetic_flags=np.concatenate([np.zeros(len(y), dtype=bool),
                                        np.ones(budget, dtype=bool)]),
        per_seed_counts=per_seed,
        seed_rows=seed_rows)


def adasyn_multiclass(X: np.ndarray, y: np.ndarray, params: AdasynParams
                      ) -> ResampleOutcome:
    """Balance several classes one-vs-rest, smallest class first.

    Each minority class is oversampled against the pooled remainder of the
    data as augmented so far, with its budget aimed at the largest original
    class count. Binary input reduces to plain :func:`adasyn`.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise ResampleError("need at least two classes")
    if len(classes) == 2:
        return adasyn(X, y, params)

    target = int(counts.max())
    order = np.argsort(counts, kind="stable")
    cur_X, cur_y = X.copy(), y.copy()
    flags = np.zeros(len(y), dtype=bool)
    seed_rows_all: list[int] = []
    per_seed: dict[int, int] = {}
    for salt, ci in enumerate(order):
        cls = classes[ci]
        n_cls = int((cur_y == cls).sum())
        budget = int(round((target - n_cls) * params.beta))
        if budget <= 0:
            continue
        sub_params = AdasynParams(beta=params.beta, k=params.k,
                                  seed=params.seed + salt + 1)
        synthetic, seed_rows, sub_per_seed = _synthesize(
            cur_X, cur_y == cls, sub_params, budget)
        cur_X = np.vstack([cur_X, synthetic])
        cur_y = np.concatenate([cur_y, np.full(budget, cls, dtype=y.dtype)])
        flags = np.concatenate([flags, np.ones(budget, dtype=bool)])
        seed_rows_all.extend(seed_rows.tolist())
        for row, g in sub_per_seed.items():
            per_seed[row] = per_seed.get(row, 0) + g
    return ResampleOutcome(features=cur_X, labels=cur_y, synthetic_flags=flags,
                           per_seed_counts=per_seed,
                           seed_rows=np.asarray(seed_rows_all, dtype=int))
