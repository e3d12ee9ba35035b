"""Soft-margin RBF SVM trained by sequential minimal optimization.

The dual is optimized pair-by-pair with the classic working-set heuristics
(second-choice by maximal error difference, then non-bound sweep, then full
sweep) against a precomputed kernel matrix. The dual objective is recorded
after every outer sweep, and training aborts with the final KKT violation
if the sweep cap is reached. Decision values are mapped to probabilities by
a sigmoid fit on the training outputs (Platt-style, with the usual
regularized targets); multiclass problems train one-vs-rest machines and
normalize the per-class probabilities.
"""

from __future__ import annotations

import math

import numpy as np

from .base import (SVM_RBF, ModelError, ModelSpec, TrainedModel,
                   constant_model_if_single_class)


class ConvergenceError(RuntimeError):
    def __init__(self, sweeps: int, kkt_violation: float):
        super().__init__(f"SMO did not converge after {sweeps} sweeps; "
                         f"max KKT violation {kkt_violation:.3e}")
        self.kkt_violation = kkt_violation


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    a2 = (A * A).sum(axis=1)[:, None]
    b2 = (B * B).sum(axis=1)[None, :]
    d2 = np.maximum(a2 + b2 - 2.0 * (A @ B.T), 0.0)
    return np.exp(-gamma * d2)


class _BinarySmo:
    """One ±1 problem: f(x) = sum_i alpha_i y_i K(x_i, x) + b."""

    def __init__(self, K: np.ndarray, y: np.ndarray, c: float, tol: float,
                 max_sweeps: int, rng: np.random.Generator):
        self.K = K
        self.y = y.astype(float)
        self.c = float(c)
        self.tol = float(tol)
        self.max_sweeps = int(max_sweeps)
        self.rng = rng
        n = len(y)
        self.alpha = np.zeros(n)
        self.b = 0.0
        self.errors = -self.y.copy()         # f=0 initially, E_i = f_i - y_i
        self.objective_history: list[float] = []

    # -- SMO steps ---------------------------------------------------------

    def _take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        a1_old, a2_old = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        e1, e2 = self.errors[i1], self.errors[i2]
        s = y1 * y2
        if y1 != y2:
            low = max(0.0, a2_old - a1_old)
            high = min(self.c, self.c + a2_old - a1_old)
        else:
            low = max(0.0, a2_old + a1_old - self.c)
            high = min(self.c, a2_old + a1_old)
        if low >= high:
            return False
        k11 = self.K[i1, i1]
        k12 = self.K[i1, i2]
        k22 = self.K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0.0:
            a2 = a2_old + y2 * (e1 - e2) / eta
            a2 = min(max(a2, low), high)
        else:
            # flat direction: evaluate the objective at both ends
            f1 = y1 * (e1 + self.b) - a1_old * k11 - s * a2_old * k12
            f2 = y2 * (e2 + self.b) - s * a1_old * k12 - a2_old * k22
            l1 = a1_old + s * (a2_old - low)
            h1 = a1_old + s * (a2_old - high)
            obj_low = (l1 * f1 + low * f2 + 0.5 * l1 * l1 * k11
                       + 0.5 * low * low * k22 + s * low * l1 * k12)
            obj_high = (h1 * f1 + high * f2 + 0.5 * h1 * h1 * k11
                        + 0.5 * high * high * k22 + s * high * h1 * k12)
            if obj_low < obj_high - 1e-12:
                a2 = low
            elif obj_low > obj_high + 1e-12:
                a2 = high
            else:
                return False
        if abs(a2 - a2_old) < 1e-12 * (a2 + a2_old + 1e-12):
            return False
        a1 = a1_old + s * (a2_old - a2)

        d1 = y1 * (a1 - a1_old)
        d2 = y2 * (a2 - a2_old)
        b1 = self.b - e1 - d1 * k11 - d2 * k12
        b2 = self.b - e2 - d1 * k12 - d2 * k22
        if 0.0 < a1 < self.c:
            b_new = b1
        elif 0.0 < a2 < self.c:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)

        self.errors += d1 * self.K[i1] + d2 * self.K[i2] + (b_new - self.b)
        self.alpha[i1] = a1
        self.alpha[i2] = a2
        self.b = b_new
        return True

    def _examine(self, i2: int) -> int:
        y2 = self.y[i2]
        a2 = self.alpha[i2]
        e2 = self.errors[i2]
        r2 = e2 * y2
        if not ((r2 < -self.tol and a2 < self.c) or (r2 > self.tol and a2 > 0.0)):
            return 0
        non_bound = np.flatnonzero((self.alpha > 0.0) & (self.alpha < self.c))
        if len(non_bound) > 1:
            i1 = int(non_bound[np.argmax(np.abs(self.errors[non_bound] - e2))])
            if self._take_step(i1, i2):
                return 1
        start = int(self.rng.integers(len(self.y)))
        for offset in range(len(non_bound)):
            i1 = int(non_bound[(start + offset) % len(non_bound)])
            if self._take_step(i1, i2):
                return 1
        for offset in range(len(self.y)):
            i1 = (start + offset) % len(self.y)
            if self._take_step(i1, i2):
                return 1
        return 0

    # -- driver ------------------------------------------------------------

    def dual_objective(self) -> float:
        w = self.alpha * self.y
        return float(self.alpha.sum() - 0.5 * w @ self.K @ w)

    def max_kkt_violation(self) -> float:
        r = self.errors * self.y          # y f - 1
        viol_zero = np.where(self.alpha <= 0.0, np.maximum(0.0, -r), 0.0)
        viol_c = np.where(self.alpha >= self.c, np.maximum(0.0, r), 0.0)
        interior = (self.alpha > 0.0) & (self.alpha < self.c)
        viol_in = np.where(interior, np.abs(r), 0.0)
        return float(np.maximum(np.maximum(viol_zero, viol_c), viol_in).max())

    def solve(self):
        n = len(self.y)
        examine_all = True
        num_changed = 1
        sweeps = 0
        while num_changed > 0 or examine_all:
            if sweeps >= self.max_sweeps:
                raise ConvergenceError(sweeps, self.max_kkt_violation())
            num_changed = 0
            if examine_all:
                for i in range(n):
                    num_changed += self._examine(i)
            else:
                for i in np.flatnonzero((self.alpha > 0.0) & (self.alpha < self.c)):
                    num_changed += self._examine(int(i))
            sweeps += 1
            self.objective_history.append(self.dual_objective())
            if examine_all:
                examine_all = False
            elif num_changed == 0:
                examine_all = True


def _fit_sigmoid(decision: np.ndarray, positive: np.ndarray,
                 max_iter: int = 100) -> tuple[float, float]:
    """Regularized sigmoid fit p = 1/(1+exp(A f + B)) on training outputs."""
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(positive, hi, lo)

    a, b = 0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))

    def nll(a_, b_):
        fapb = decision * a_ + b_
        return float(np.sum(np.where(
            fapb >= 0, t * fapb + np.log1p(np.exp(-fapb)),
            (t - 1) * fapb + np.log1p(np.exp(fapb)))))

    sigma = 1e-12
    best = nll(a, b)
    for _ in range(max_iter):
        fapb = decision * a + b
        p = np.where(fapb >= 0, np.exp(-fapb) / (1 + np.exp(-fapb)),
                     1 / (1 + np.exp(fapb)))
        d1 = t - p
        d2 = p * (1 - p)
        g1 = float(np.sum(decision * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < 1e-10 and abs(g2) < 1e-10:
            break
        h11 = float(np.sum(decision * decision * d2)) + sigma
        h22 = float(np.sum(d2)) + sigma
        h12 = float(np.sum(decision * d2))
        det = h11 * h22 - h12 * h12
        da = -(h22 * g1 - h12 * g2) / det
        db = -(-h12 * g1 + h11 * g2) / det
        # gradient descent direction check + backtracking line search
        step = 1.0
        while step >= 1e-10:
            new_a, new_b = a + step * da, b + step * db
            value = nll(new_a, new_b)
            if value < best + 1e-12:
                a, b, best = new_a, new_b, value
                break
            step /= 2.0
        else:
            break
    return a, b


def _sigmoid_prob(decision: np.ndarray, a: float, b: float) -> np.ndarray:
    fapb = decision * a + b
    return np.where(fapb >= 0, np.exp(-fapb) / (1 + np.exp(-fapb)),
                    1 / (1 + np.exp(fapb)))


class SvmRbfModel(TrainedModel):
    def __init__(self, spec, classes, n_features, support_vectors, machines,
                 objective_histories):
        super().__init__(spec, classes, n_features)
        self.support_vectors = support_vectors
        self.machines = machines            # per class: (coef, b, platt_a, platt_b)
        self.objective_histories = objective_histories

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        X = self._check_input(X)
        K = rbf_kernel(X, self.support_vectors, float(self.spec["gamma"]))
        cols = [K @ coef + b for coef, b, _, _ in self.machines]
        return np.column_stack(cols)

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        decisions = self.decision_values(X)
        probs = np.column_stack([
            _sigmoid_prob(decisions[:, j], m[2], m[3])
            for j, m in enumerate(self.machines)])
        if probs.shape[1] == 1:             # binary: single machine for classes[1]
            probs = np.column_stack([1.0 - probs[:, 0], probs[:, 0]])
        totals = probs.sum(axis=1, keepdims=True)
        flat = totals[:, 0] <= 0.0
        if flat.any():
            probs[flat] = 1.0 / probs.shape[1]
            totals = probs.sum(axis=1, keepdims=True)
        return probs / totals


def train_svm_rbf(X: np.ndarray, y: np.ndarray, spec: ModelSpec) -> TrainedModel:
    if spec.kind != SVM_RBF:
        raise ModelError(f"spec kind {spec.kind!r} is not {SVM_RBF!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes = np.unique(y)
    constant = constant_model_if_single_class(spec, classes, X.shape[1])
    if constant is not None:
        return constant

    gamma = float(spec["gamma"])
    K = rbf_kernel(X, X, gamma)
    # binary trains one machine (positive = classes[1]); multiclass one per class
    targets = [classes[1]] if len(classes) == 2 else list(classes)
    machines = []
    histories = []
    for j, cls in enumerate(targets):
        sign = np.where(y == cls, 1.0, -1.0)
        smo = _BinarySmo(K, sign, c=float(spec["c"]), tol=float(spec["tol"]),
                         max_sweeps=int(spec["max_sweeps"]),
                         rng=np.random.default_rng(np.random.SeedSequence([spec.seed, j])))
        smo.solve()
        decision = K @ (smo.alpha * sign) + smo.b
        platt_a, platt_b = _fit_sigmoid(decision, sign > 0)
        machines.append((smo.alpha * sign, smo.b, platt_a, platt_b))
        histories.append(smo.objective_history)
    return SvmRbfModel(spec, classes, X.shape[1], X.copy(), machines, histories)
