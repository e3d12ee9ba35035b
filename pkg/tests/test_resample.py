import numpy as np
import pytest

from cohort_augment.resample import (AdasynParams, ResampleError, adasyn,
                                     adasyn_multiclass, k_nearest)


# ---------------------------------------------------------------------------
# Neighbor search

def test_k_nearest_1d_example():
    points = np.array([0.0, 1.0, 2.0, 10.0])
    assert k_nearest(points, 0, 2) == [1, 2]


def test_duplicate_point_is_nearest():
    points = np.array([[0.0, 0.0], [5.0, 5.0], [0.0, 0.0]])
    assert k_nearest(points, 0, 1) == [2]


def test_k_equals_n_minus_one_returns_everything():
    points = np.arange(6, dtype=float)
    assert sorted(k_nearest(points, 2, 5)) == [0, 1, 3, 4, 5]


def test_ties_break_by_index():
    points = np.array([0.0, 1.0, -1.0, 1.0])
    assert k_nearest(points, 0, 2) == [1, 2]


def test_nan_coordinates_are_error():
    points = np.array([[0.0], [np.nan]])
    with pytest.raises(ResampleError, match="NaN"):
        k_nearest(points, 0, 1)


def test_k_too_large_is_error():
    with pytest.raises(ResampleError):
        k_nearest(np.arange(3, dtype=float), 0, 3)


# ---------------------------------------------------------------------------
# ADASYN: spec hand trace

def _hand_trace_instance():
    X = np.array([[0.0], [1.0], [0.5], [1.6], [3.0], [4.0]])
    y = np.array([1, 1, 0, 0, 0, 0])
    return X, y


def test_hand_traced_allocation_and_range():
    X, y = _hand_trace_instance()
    outcome = adasyn(X, y, AdasynParams(beta=1.0, k=3, seed=0))
    # G = 4 - 2 = 2; both minority points see 2 majority neighbors among 3
    assert outcome.per_seed_counts == {0: 1, 1: 1}
    synthetic = outcome.features[outcome.synthetic_flags]
    assert synthetic.shape == (2, 1)
    assert np.all(synthetic >= 0.0) and np.all(synthetic <= 1.0)


def test_balanced_input_is_identity():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(10, 3))
    y = np.array([0] * 5 + [1] * 5)
    outcome = adasyn(X, y, AdasynParams(beta=1.0, k=3, seed=1))
    np.testing.assert_array_equal(outcome.features, X)
    np.testing.assert_array_equal(outcome.labels, y)
    assert not outcome.synthetic_flags.any()


def test_multiclass_input_rejected():
    X = np.zeros((6, 2))
    y = np.array([0, 0, 1, 1, 2, 2])
    with pytest.raises(ResampleError, match="binary"):
        adasyn(X, y, AdasynParams())


def test_minority_singleton_rejected():
    X = np.arange(8, dtype=float).reshape(-1, 1)
    y = np.array([0] * 7 + [1])
    with pytest.raises(ResampleError, match="two members"):
        adasyn(X, y, AdasynParams(k=3))


# ---------------------------------------------------------------------------
# ADASYN invariants over random instances

def _random_imbalanced(rng):
    n_min = int(rng.integers(3, 10))
    n_maj = int(rng.integers(n_min + 1, 40))
    d = int(rng.integers(1, 6))
    X = np.vstack([rng.normal(0.0, 1.0, (n_maj, d)),
                   rng.normal(1.0, 1.0, (n_min, d))])
    y = np.concatenate([np.zeros(n_maj, dtype=int), np.ones(n_min, dtype=int)])
    perm = rng.permutation(len(y))
    return X[perm], y[perm]


def test_beta_one_balances_exactly():
    rng = np.random.default_rng(5)
    for _ in range(25):
        X, y = _random_imbalanced(rng)
        k = min(5, len(y) - 1)
        outcome = adasyn(X, y, AdasynParams(beta=1.0, k=k, seed=3))
        _, counts = np.unique(outcome.labels, return_counts=True)
        assert counts[0] == counts[1]


def test_sum_of_allocations_is_g():
    rng = np.random.default_rng(6)
    for _ in range(25):
        X, y = _random_imbalanced(rng)
        beta = float(rng.choice([0.25, 0.5, 1.0]))
        k = min(5, len(y) - 1)
        outcome = adasyn(X, y, AdasynParams(beta=beta, k=k, seed=4))
        _, counts = np.unique(y, return_counts=True)
        g = int(round((counts.max() - counts.min()) * beta))
        assert int(outcome.synthetic_flags.sum()) == g
        assert sum(outcome.per_seed_counts.values()) == g


def _recover_lambda(s, a, b):
    """Consistent interpolation coefficient across coordinates, else None."""
    lams = []
    for sc, ac, bc in zip(s, a, b):
        denom = bc - ac
        if abs(denom) > 1e-12:
            lams.append((sc - ac) / denom)
        elif abs(sc - ac) > 1e-9:
            return None
    if not lams:
        return 0.0
    if max(lams) - min(lams) > 1e-9:
        return None
    return float(np.mean(lams))


def test_synthetic_rows_are_convex_combinations():
    rng = np.random.default_rng(7)
    for _ in range(25):
        X, y = _random_imbalanced(rng)
        k = min(5, len(y) - 1)
        outcome = adasyn(X, y, AdasynParams(beta=1.0, k=k, seed=11))
        minority_rows = np.flatnonzero(y == 1)
        synthetic = outcome.features[outcome.synthetic_flags]
        seeds = outcome.seed_rows
        for j, s in enumerate(synthetic):
            a = X[seeds[j]]
            found = False
            for partner in minority_rows:
                lam = _recover_lambda(s, a, X[partner])
                if lam is not None and -1e-9 <= lam <= 1.0 + 1e-9:
                    found = True
                    break
            assert found, "synthetic row is not on a segment between minority rows"


def test_originals_preserved_bitwise():
    rng = np.random.default_rng(8)
    X, y = _random_imbalanced(rng)
    k = min(5, len(y) - 1)
    outcome = adasyn(X, y, AdasynParams(beta=1.0, k=k, seed=2))
    n = len(y)
    assert np.array_equal(outcome.features[:n], X)        # bitwise
    assert np.array_equal(outcome.labels[:n], y)
    assert not outcome.synthetic_flags[:n].any()


def test_same_seed_identical_different_seed_differs():
    rng = np.random.default_rng(9)
    X, y = _random_imbalanced(rng)
    k = min(5, len(y) - 1)
    a = adasyn(X, y, AdasynParams(beta=1.0, k=k, seed=21))
    b = adasyn(X, y, AdasynParams(beta=1.0, k=k, seed=21))
    c = adasyn(X, y, AdasynParams(beta=1.0, k=k, seed=22))
    np.testing.assert_array_equal(a.features, b.features)
    assert not np.array_equal(a.features, c.features)


def test_uniform_fallback_when_no_majority_neighbors():
    # minority cluster far away: its k nearest are all fellow minority points
    X = np.vstack([np.random.default_rng(1).normal(100.0, 0.1, (4, 2)),
                   np.random.default_rng(2).normal(0.0, 0.1, (10, 2))])
    y = np.array([1] * 4 + [0] * 10)
    outcome = adasyn(X, y, AdasynParams(beta=1.0, k=3, seed=5))
    assert int(outcome.synthetic_flags.sum()) == 6
    # even split across the four seeds, largest remainder: 2,2,1,1
    assert sorted(outcome.per_seed_counts.values(), reverse=True) == [2, 2, 1, 1]


# ---------------------------------------------------------------------------
# One-vs-rest multiclass balancing

def test_multiclass_balances_all_classes():
    rng = np.random.default_rng(10)
    X = np.vstack([rng.normal(0, 1, (30, 3)), rng.normal(2, 1, (8, 3)),
                   rng.normal(-2, 1, (5, 3))])
    y = np.array(["maj"] * 30 + ["mid"] * 8 + ["min"] * 5)
    outcome = adasyn_multiclass(X, y, AdasynParams(beta=1.0, k=4, seed=6))
    _, counts = np.unique(outcome.labels, return_counts=True)
    assert (counts == 30).all()
    assert np.array_equal(outcome.features[:43], X)


def test_multiclass_binary_reduces_to_adasyn():
    rng = np.random.default_rng(12)
    X, y = _random_imbalanced(rng)
    k = min(5, len(y) - 1)
    a = adasyn(X, y, AdasynParams(beta=1.0, k=k, seed=9))
    b = adasyn_multiclass(X, y, AdasynParams(beta=1.0, k=k, seed=9))
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)
