"""Acceptance suite: one test per criterion, each printing a pass line with
its runtime (run ``pytest -v -s tests/test_acceptance.py`` to see them).
Tolerances are pinned in the assertions."""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import make_sample
from test_evaluate import brute_force_auc
from test_stats import anova_by_sums_of_squares, f_cdf_by_integration

from cohort_augment.cli import cli_main
from cohort_augment.corpus import SyntheticSpec, generate_synthetic_cohort
from cohort_augment.evaluate import confusion_and_f1, grouped_split, roc_auc
from cohort_augment.features import (count_syllables, extract_matrix,
                                     named_features, readability_features)
from cohort_augment.learners import ModelSpec, train_model
from cohort_augment.learners.mlp import init_parameters, loss_and_gradients
from cohort_augment.pipeline import fit_training_stages
from cohort_augment.resample import AdasynParams, adasyn
from cohort_augment.stats import chi2_sf, f_cdf, one_way_anova, select_features
from cohort_augment.features.matrix import FeatureMatrix


class _Budget:
    def __init__(self, name: str, seconds: float):
        self.name = name
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        if exc_type is None:
            assert elapsed < self.seconds, (
                f"{self.name} took {elapsed:.1f}s, over the {self.seconds:.0f}s budget")
            print(f"ACCEPTANCE {self.name}: PASS ({elapsed:.1f}s)")
        else:
            print(f"ACCEPTANCE {self.name}: FAIL ({elapsed:.1f}s)")
        return False


# ---------------------------------------------------------------------------

def test_criterion_1_statistical_oracles():
    with _Budget("1 statistical oracles", 10):
        rng = np.random.default_rng(20260811)
        for _ in range(100):
            k = int(rng.integers(2, 5))
            groups = [rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 2.0),
                                 size=int(rng.integers(2, 12))).tolist()
                      for _ in range(k)]
            mine = one_way_anova(groups)
            f_ref, p_ref = anova_by_sums_of_squares(groups)
            assert mine.f_stat == pytest.approx(f_ref, rel=1e-9, abs=1e-12)
            assert mine.p_value == pytest.approx(p_ref, abs=1e-9)

        for _ in range(25):
            d1 = int(rng.integers(1, 15))
            d2 = int(rng.integers(1, 15))
            x = float(rng.uniform(0.05, 6.0))
            assert f_cdf(x, d1, d2) == pytest.approx(
                f_cdf_by_integration(x, d1, d2), abs=1e-6)

        for d in (2, 4, 10):
            assert f_cdf(1.0, d, d) == pytest.approx(0.5, abs=1e-9)


def test_criterion_2_chi2_reference_value():
    with _Budget("2 chi-square anchor", 1):
        assert chi2_sf(2.34, 1) == pytest.approx(0.126, abs=0.005)


def test_criterion_3_adasyn_invariants():
    with _Budget("3 ADASYN invariants", 10):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n_min = int(rng.integers(3, 10))
            n_maj = int(rng.integers(n_min + 1, 40))
            d = int(rng.integers(1, 6))
            X = np.vstack([rng.normal(0.0, 1.0, (n_maj, d)),
                           rng.normal(1.0, 1.0, (n_min, d))])
            y = np.concatenate([np.zeros(n_maj, dtype=int),
                                np.ones(n_min, dtype=int)])
            perm = rng.permutation(len(y))
            X, y = X[perm], y[perm]
            k = min(5, len(y) - 1)
            outcome = adasyn(X, y, AdasynParams(beta=1.0, k=k, seed=11))

            # (a) exact balance at beta = 1
            _, counts = np.unique(outcome.labels, return_counts=True)
            assert counts[0] == counts[1]

            # (c) originals preserved bitwise, first
            assert np.array_equal(outcome.features[:len(y)], X)
            assert not outcome.synthetic_flags[:len(y)].any()

            # (b) synthetic rows are convex combinations of two minority rows,
            # with one interpolation coefficient across all coordinates
            minority_rows = np.flatnonzero(y == 1)
            synthetic = outcome.features[outcome.synthetic_flags]
            for j, srow in enumerate(synthetic):
                a = X[outcome.seed_rows[j]]
                ok = False
                for partner in minority_rows:
                    b = X[partner]
                    lams = []
                    consistent = True
                    for sc, ac, bc in zip(srow, a, b):
                        denom = bc - ac
                        if abs(denom) > 1e-12:
                            lams.append((sc - ac) / denom)
                        elif abs(sc - ac) > 1e-9:
                            consistent = False
                            break
                    if not consistent:
                        continue
                    if not lams:
                        ok = True
                        break
                    if (max(lams) - min(lams) <= 1e-9
                            and -1e-9 <= lams[0] <= 1 + 1e-9):
                        ok = True
                        break
                assert ok, "synthetic row is not a consistent interpolation"

        # (d) the hand-traced 1-D instance
        X = np.array([[0.0], [1.0], [0.5], [1.6], [3.0], [4.0]])
        y = np.array([1, 1, 0, 0, 0, 0])
        outcome = adasyn(X, y, AdasynParams(beta=1.0, k=3, seed=0))
        assert outcome.per_seed_counts == {0: 1, 1: 1}
        synthetic = outcome.features[outcome.synthetic_flags]
        assert np.all(synthetic >= 0.0) and np.all(synthetic <= 1.0)


def test_criterion_4_metric_oracles():
    with _Budget("4 metric oracles", 10):
        _, macro, micro = confusion_and_f1([0, 0, 1, 1], [0, 1, 1, 1])
        assert macro == (2 / 3 + 0.8) / 2
        assert micro == 0.75
        assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
        assert roc_auc([0.5, 0.5, 0.5, 0.5], [0, 1, 0, 1]) == 0.5
        assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

        rng = np.random.default_rng(4)
        for _ in range(1000):
            n = int(rng.integers(2, 51))
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            scores = np.round(rng.random(n), 2)
            assert roc_auc(scores, labels) == brute_force_auc(scores, labels)


def test_criterion_5_leakage_and_grouping(lexicons):
    with _Budget("5 leakage and grouping", 30):
        cohort = generate_synthetic_cohort(
            SyntheticSpec(n_control=30, n_impaired=12, effect=1.0), seed=3)
        matrix = extract_matrix(cohort, named_features(lexicons), lexicons)
        for seed in range(1000):
            split = grouped_split(matrix.groups, ratio=0.8, seed=seed)
            train_groups = {matrix.groups[i] for i in split.train_indices}
            test_groups = {matrix.groups[i] for i in split.test_indices}
            assert not train_groups & test_groups

        split = grouped_split(matrix.groups, ratio=0.8, seed=0)
        grid = [ModelSpec("random_forest", {"trees": 8}, seed=1),
                ModelSpec("svm_rbf", seed=2)]

        def fingerprint(m):
            return fit_training_stages(
                m, split, alpha=0.1, oversample=True,
                adasyn_params=AdasynParams(beta=1.0, k=3, seed=5),
                model_grid=grid, cv_folds=2, cv_seed=0).fingerprint()

        clean = fingerprint(matrix)
        poisoned = extract_matrix(cohort, named_features(lexicons), lexicons)
        poisoned.values[split.test_indices] = 9.9e9
        assert fingerprint(poisoned) == clean


def test_criterion_6_learner_sanity():
    with _Budget("6 learner sanity", 120):
        # MLP gradient check vs central differences on a 2-2-2 net
        rng = np.random.default_rng(3)
        weights, biases = init_parameters(rng, [2, 2, 2])
        X = rng.normal(size=(5, 2))
        onehot = np.zeros((5, 2))
        onehot[np.arange(5), rng.integers(0, 2, 5)] = 1.0
        _, grad_w, grad_b = loss_and_gradients(weights, biases, X, onehot)
        h = 1e-6
        worst = 0.0
        for params, grads in ((weights, grad_w), (biases, grad_b)):
            for layer in range(len(params)):
                it = np.nditer(params[layer], flags=["multi_index"])
                for _ in it:
                    idx = it.multi_index
                    orig = params[layer][idx]
                    params[layer][idx] = orig + h
                    up, _, _ = loss_and_gradients(weights, biases, X, onehot)
                    params[layer][idx] = orig - h
                    down, _, _ = loss_and_gradients(weights, biases, X, onehot)
                    params[layer][idx] = orig
                    numeric = (up - down) / (2 * h)
                    rel = abs(numeric - grads[layer][idx]) / max(
                        1e-8, abs(numeric) + abs(grads[layer][idx]))
                    worst = max(worst, rel)
        assert worst < 1e-4

        # blobs: N = 200, sigma 0.1, centers 5 apart
        rng = np.random.default_rng(9)
        X = np.vstack([rng.normal([-2.5, 0.0], 0.1, (100, 2)),
                       rng.normal([2.5, 0.0], 0.1, (100, 2))])
        y = np.array(["ct"] * 100 + ["ad"] * 100)
        perm = rng.permutation(200)
        X, y = X[perm], y[perm]
        train, test = np.arange(160), np.arange(160, 200)

        # GB: per-stage training log-loss never increases
        gb = train_model(X[train], y[train],
                         ModelSpec("gradient_boosting", {"trees": 40}, seed=2))
        assert (np.diff(gb.train_loss_history) <= 1e-9).all()
        assert (gb.predict(X[test]) == y[test]).mean() == 1.0

        # SVM: dual objective never decreases across SMO sweeps (gamma 0.001)
        svm = train_model(X[train], y[train], ModelSpec("svm_rbf", seed=3))
        for history in svm.objective_histories:
            assert (np.diff(history) >= -1e-8).all()
        assert (svm.predict(X[test]) == y[test]).mean() == 1.0

        rf = train_model(X[train], y[train],
                         ModelSpec("random_forest", {"trees": 100}, seed=1))
        assert (rf.predict(X[test]) == y[test]).mean() == 1.0

        mlp = train_model(X[train], y[train], ModelSpec("mlp", {"epochs": 60}, seed=4))
        assert (mlp.predict(X[test]) == y[test]).mean() == 1.0


def _criterion_7_config(synth_manifest: Path, out_dir: Path, task: str) -> dict:
    return {
        "task": task,
        "manifests": {"SYNTH": str(synth_manifest)},
        "conditions": [
            {"name": "SYNTH only", "sources": ["SYNTH"], "oversample": False},
            {"name": "SYNTH (oversampled)", "sources": ["SYNTH"], "oversample": True},
        ],
        "alpha": 0.005,
        "adasyn": {"beta": 1.0, "k": 5, "seed": 0},
        "models": [
            {"kind": "random_forest", "hyperparameters": {"trees": 100}, "seed": 1},
            {"kind": "gradient_boosting", "hyperparameters": {"trees": 60}, "seed": 2},
            {"kind": "svm_rbf", "seed": 3},
            {"kind": "mlp", "hyperparameters": {"units": 128, "layers": 4,
                                                "epochs": 60, "learning_rate": 0.01,
                                                "batch_size": 100}, "seed": 4},
        ],
        "split": {"ratio": 0.8, "seeds": [17]},
        "cv_folds": 3,
        "output": str(out_dir),
    }


def test_criterion_7_end_to_end(tmp_path):
    with _Budget("7 end to end", 300):
        synth = tmp_path / "synth"
        assert cli_main(["synth", "--control", "300", "--impaired", "60",
                         "--effect", "large", "--seed", "2026",
                         "--out", str(synth)]) == 0
        manifest = synth / "manifest.json"

        cfg_a = tmp_path / "binary.json"
        cfg_a.write_text(json.dumps(_criterion_7_config(manifest, tmp_path / "runA",
                                                        "binary")))
        assert cli_main(["pipeline", "--config", str(cfg_a)]) == 0

        report = json.loads((tmp_path / "runA" / "report_binary.json").read_text())
        cells = {tuple(k.split("␟")): v for k, v in report["cells"].items()}
        macros = [cells[("SYNTH (oversampled)", m)]["f1_macro"][0]
                  for m in report["models"]]
        assert sum(1 for v in macros if v >= 0.9) >= 3, macros

        # Tables in the published layout: F1 and AUC grids for both tasks,
        # conditions as rows, one column group per model
        cfg_t = tmp_path / "trinary.json"
        cfg_t.write_text(json.dumps(_criterion_7_config(manifest, tmp_path / "runT",
                                                        "trinary")))
        assert cli_main(["pipeline", "--config", str(cfg_t)]) == 0

        binary_f1 = (tmp_path / "runA" / "report_binary_f1.csv").read_text()
        lines = binary_f1.strip().splitlines()
        assert len(lines) == 3                               # header + 2 conditions
        assert len(lines[0].split(",")) == 1 + 4 * 2         # 4 models x macro/micro
        binary_auc = (tmp_path / "runA" / "report_binary_auc.csv").read_text()
        assert len(binary_auc.strip().splitlines()[0].split(",")) == 1 + 4
        trinary_f1 = (tmp_path / "runT" / "report_trinary_f1.csv").read_text()
        assert len(trinary_f1.strip().splitlines()[0].split(",")) == 1 + 4 * 2
        trinary_auc = (tmp_path / "runT" / "report_trinary_auc.csv").read_text()
        header = trinary_auc.strip().splitlines()[0]
        assert header.count("AUC Moderate") == 4 and header.count("AUC Mild") == 4
        for task_dir, fig in (("runA", "fig_binary_f1_macro.png"),
                              ("runT", "fig_trinary_f1_macro.png")):
            assert (tmp_path / task_dir / fig).exists()

        # determinism: identical config + seed, fresh output directory
        cfg_b = tmp_path / "binary_b.json"
        cfg_b.write_text(json.dumps(_criterion_7_config(manifest, tmp_path / "runB",
                                                        "binary")))
        assert cli_main(["pipeline", "--config", str(cfg_b)]) == 0
        run_a, run_b = tmp_path / "runA", tmp_path / "runB"
        rel_a = sorted(p.relative_to(run_a) for p in run_a.rglob("*") if p.is_file())
        rel_b = sorted(p.relative_to(run_b) for p in run_b.rglob("*") if p.is_file())
        assert rel_a == rel_b
        for rel in rel_a:
            if rel.name == "run.log":      # stage wall-clock timings differ
                continue
            assert (run_a / rel).read_bytes() == (run_b / rel).read_bytes(), rel


def test_criterion_8_formula_checks():
    with _Budget("8 formula checks", 1):
        words = ["the", "boy", "washes", "dishes", "while", "water",
                 "overflows", "in", "the", "sink"]
        assert sum(count_syllables(w) for w in words) == 15
        sample = make_sample([words])
        flesch = readability_features(sample)["flesch"]
        assert flesch == 206.835 - 1.015 * (10 / 1) - 84.6 * (15 / 10)
        assert abs(flesch - 69.785) < 1e-12

        doubled = make_sample([words, words])
        assert readability_features(doubled)["flesch"] == flesch
        assert (readability_features(doubled)["flesch_kincaid"]
                == readability_features(sample)["flesch_kincaid"])

        # threshold inclusivity: a feature whose p equals alpha is selected
        rng = np.random.default_rng(3)
        values = np.column_stack([rng.normal(0, 1, 12)])
        values[6:, 0] += 1.5
        matrix = FeatureMatrix(feature_names=["f0"], values=values,
                               labels=["a"] * 6 + ["b"] * 6,
                               groups=[f"g{i}" for i in range(12)])
        p = select_features(matrix, alpha=1.0).per_feature["f0"].p_value
        assert select_features(matrix, alpha=p).selected == ["f0"]
