import json

import numpy as np
import pytest

from cohort_augment.cli import cli_main
from cohort_augment.evaluate import grouped_split
from cohort_augment.features import (extract_matrix, named_features,
                                     read_matrix_csv)
from cohort_augment.learners import ModelSpec
from cohort_augment.pipeline import (PipelineConfig, PipelineError,
                                     fit_training_stages, run_pipeline)
from cohort_augment.resample import AdasynParams
from cohort_augment.corpus import SyntheticSpec, generate_synthetic_cohort

FAST_MODELS = [
    {"kind": "random_forest", "hyperparameters": {"trees": 15}, "seed": 1},
    {"kind": "gradient_boosting", "hyperparameters": {"trees": 10}, "seed": 2},
    {"kind": "svm_rbf", "seed": 3},
    {"kind": "mlp", "hyperparameters": {"units": 16, "layers": 2, "epochs": 15,
                                        "learning_rate": 0.01, "batch_size": 32},
     "seed": 4},
]


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    rc = cli_main(["synth", "--control", "40", "--impaired", "14",
                   "--effect", "large", "--seed", "7", "--out", str(out)])
    assert rc == 0
    return out


def _config_doc(synth_dir, out_dir, task="binary", seeds=(11,), conditions=None):
    return {
        "task": task,
        "manifests": {"SYNTH": str(synth_dir / "manifest.json")},
        "conditions": conditions or [
            {"name": "SYNTH only", "sources": ["SYNTH"], "oversample": False},
            {"name": "SYNTH (oversampled)", "sources": ["SYNTH"], "oversample": True},
        ],
        "alpha": 0.05,
        "adasyn": {"beta": 1.0, "k": 5, "seed": 0},
        "models": FAST_MODELS,
        "split": {"ratio": 0.8, "seeds": list(seeds)},
        "cv_folds": 3,
        "output": str(out_dir),
    }


# ---------------------------------------------------------------------------
# CLI stage chain

def test_synth_output_layout(synth_dir):
    manifest = json.loads((synth_dir / "manifest.json").read_text())
    assert len(manifest["samples"]) == 54
    first = manifest["samples"][0]
    assert (synth_dir / first["transcript"]).exists()
    assert (synth_dir / first["trees"]).exists()


def test_ingest_summary(synth_dir, capsys):
    rc = cli_main(["ingest", "--manifest", str(synth_dir / "manifest.json")])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["samples"] == 54
    assert summary["by_diagnosis"] == {"AD": 14, "Control": 40}


def test_extract_select_resample_train_eval_chain(synth_dir, tmp_path, capsys):
    features = tmp_path / "features.csv"
    rc = cli_main(["extract", "--manifest", str(synth_dir / "manifest.json"),
                   "--out", str(features)])
    assert rc == 0
    matrix = read_matrix_csv(features)
    assert matrix.values.shape[0] == 54

    selection = tmp_path / "selection.csv"
    rc = cli_main(["select", "--features", str(features),
                   "--alpha", "0.005", "--out", str(selection)])
    assert rc == 0
    lines = selection.read_text().strip().splitlines()
    assert lines[0] == "feature,F,p,selected"

    resampled = tmp_path / "resampled.csv"
    rc = cli_main(["resample", "--features", str(features),
                   "--out", str(resampled), "--seed", "5"])
    assert rc == 0
    out = read_matrix_csv(resampled)
    labels = np.asarray(out.labels)
    assert (labels == "AD").sum() == (labels == "Control").sum()
    header = resampled.read_text().splitlines()[0]
    assert header.endswith("synthetic_flag")

    model_path = tmp_path / "model.json"
    rc = cli_main(["train", "--features", str(resampled), "--kind",
                   "random_forest", "--param", "trees=10", "--seed", "3",
                   "--out", str(model_path)])
    assert rc == 0

    metrics_path = tmp_path / "metrics.json"
    rc = cli_main(["eval", "--model", str(model_path), "--features",
                   str(features), "--out", str(metrics_path)])
    assert rc == 0
    metrics = json.loads(metrics_path.read_text())
    assert 0.0 <= metrics["f1_macro"] <= 1.0
    assert "AD" in metrics["auc"]


def test_cli_exit_codes(tmp_path, capsys):
    assert cli_main([]) == 1                                  # no subcommand
    assert cli_main(["select", "--alpha", "0.1"]) == 1        # missing required
    err = capsys.readouterr().err
    assert "usage" in err.lower()
    assert cli_main(["select", "--features", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "o.csv")]) == 2  # runtime error
    assert cli_main(["synth", "--bogus-flag", "1"]) == 1      # unknown flag
    err = capsys.readouterr().err
    assert "usage" in err.lower()


def test_cli_help_exits_zero(capsys):
    assert cli_main(["--help"]) == 0
    assert "cohort-augment" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# Pipeline runs

def test_pipeline_run_and_report(synth_dir, tmp_path, capsys):
    out_dir = tmp_path / "run"
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(_config_doc(synth_dir, out_dir)))
    rc = cli_main(["pipeline", "--config", str(config_path)])
    assert rc == 0

    report = json.loads((out_dir / "report_binary.json").read_text())
    assert report["conditions"] == ["SYNTH only", "SYNTH (oversampled)"]
    assert set(report["models"]) == {m["kind"] for m in FAST_MODELS}
    for name in ("report_binary_f1.csv", "report_binary_f1.md",
                 "report_binary_auc.csv", "report_binary_auc.md",
                 "fig_binary_f1_macro.png", "fig_binary_auc_AD.png",
                 "run.log", "config.json"):
        assert (out_dir / name).exists(), name

    seed_dir = out_dir / "conditions" / "synth--oversampled" / "seed11"
    for name in ("features.csv", "selection.csv", "resample.csv",
                 "metrics.json", "model_random_forest.json"):
        assert (seed_dir / name).exists(), name
    # non-oversampled condition has no resample artifact
    assert not (out_dir / "conditions" / "synth-only" / "seed11" / "resample.csv").exists()

    rc = cli_main(["report", "--run", str(out_dir), "--format", "markdown"])
    assert rc == 0


def test_pipeline_trinary_smoke(synth_dir, tmp_path):
    out_dir = tmp_path / "run3"
    doc = _config_doc(synth_dir, out_dir, task="trinary", conditions=[
        {"name": "SYNTH (oversampled)", "sources": ["SYNTH"], "oversample": True}])
    config = PipelineConfig.from_dict(doc, base_dir=tmp_path)
    artifacts = run_pipeline(config)
    assert artifacts.report.task == "trinary"
    auc_csv = (out_dir / "report_trinary_auc.csv").read_text()
    assert "AUC Moderate" in auc_csv and "AUC Mild" in auc_csv


def test_failed_condition_does_not_kill_run(synth_dir, tmp_path):
    out_dir = tmp_path / "run4"
    doc = _config_doc(synth_dir, out_dir, conditions=[
        {"name": "good", "sources": ["SYNTH"], "oversample": False},
        {"name": "bad", "sources": ["SYNTH"], "oversample": True},
    ])
    doc["adasyn"]["k"] = 4000          # invalid for this training size
    config = PipelineConfig.from_dict(doc, base_dir=tmp_path)
    artifacts = run_pipeline(config)
    assert ("good", "random_forest") in artifacts.report.cells
    assert ("bad", "random_forest") not in artifacts.report.cells
    log_text = artifacts.log_path.read_text()
    assert '"stage": "error"' in log_text


def test_config_validation_errors(tmp_path):
    with pytest.raises(PipelineError, match="manifest"):
        PipelineConfig.from_dict({
            "task": "binary",
            "manifests": {"X": str(tmp_path / "missing.json")},
            "conditions": [{"name": "c", "sources": ["X"]}],
            "models": FAST_MODELS, "split": {"seeds": [1]},
            "output": str(tmp_path / "o")})
    with pytest.raises(PipelineError, match="unknown source"):
        PipelineConfig.from_dict({
            "task": "binary", "manifests": {},
            "conditions": [{"name": "c", "sources": ["X"]}],
            "models": FAST_MODELS, "split": {"seeds": [1]},
            "output": str(tmp_path / "o")})


# ---------------------------------------------------------------------------
# Leakage: training artifacts never read test rows

def _training_fingerprint(matrix, split):
    grid = [ModelSpec("random_forest", {"trees": 8}, seed=1),
            ModelSpec("svm_rbf", seed=2)]
    artifacts = fit_training_stages(
        matrix, split, alpha=0.1, oversample=True,
        adasyn_params=AdasynParams(beta=1.0, k=3, seed=5),
        model_grid=grid, cv_folds=2, cv_seed=0)
    return artifacts.fingerprint()


def test_training_artifacts_invariant_to_test_row_poisoning(lexicons):
    cohort = generate_synthetic_cohort(
        SyntheticSpec(n_control=25, n_impaired=10, effect=1.0), seed=3)
    matrix = extract_matrix(cohort, named_features(lexicons), lexicons)
    split = grouped_split(matrix.groups, ratio=0.8, seed=0)

    clean = _training_fingerprint(matrix, split)

    poisoned = extract_matrix(cohort, named_features(lexicons), lexicons)
    poisoned.values[split.test_indices] = 9.9e9       # sentinel garbage
    assert _training_fingerprint(poisoned, split) == clean

    # sanity: nudging a TRAINING cell must change the artifacts
    poisoned2 = extract_matrix(cohort, named_features(lexicons), lexicons)
    poisoned2.values[split.train_indices[0], 0] += 0.5
    assert _training_fingerprint(poisoned2, split) != clean


def test_thread_cap_does_not_change_outputs(synth_dir, tmp_path, monkeypatch):
    out_serial = tmp_path / "serial"
    out_threaded = tmp_path / "threaded"
    doc = _config_doc(synth_dir, out_serial, seeds=(11, 12))
    config = PipelineConfig.from_dict(doc, base_dir=tmp_path)
    run_pipeline(config)

    monkeypatch.setenv("COHORT_AUGMENT_THREADS", "4")
    doc2 = _config_doc(synth_dir, out_threaded, seeds=(11, 12))
    run_pipeline(PipelineConfig.from_dict(doc2, base_dir=tmp_path))

    rel = sorted(p.relative_to(out_serial)
                 for p in out_serial.rglob("*") if p.is_file())
    for r in rel:
        if r.name in ("run.log", "config.json"):    # timing / output path differ
            continue
        assert (out_serial / r).read_bytes() == (out_threaded / r).read_bytes(), r
