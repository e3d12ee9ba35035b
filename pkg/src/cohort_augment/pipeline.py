"""End-to-end experiment orchestration from a single declarative config.

For every condition x split seed: load and merge datasets, split by
participant, extract features, fit imputation/standardization on the
training rows, ANOVA-select on the training rows, optionally oversample the
training rows, grid-search each model kind with grouped CV, fit the best
specs, and evaluate on the held-out rows. Everything downstream of the
split sees training rows only, which the leakage tests verify by poisoning
test rows and comparing training artifacts.

Per-stage records (timing + content hashes) go to ``run.log`` as JSON
lines; every other artifact is a pure function of (config, code).
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import pickle
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus.manifest import load_manifest
from .corpus.model import CohortDataset
from .evaluate import (EvalReport, SplitAssignment, confusion_and_f1,
                       grouped_split, label_binary, label_trinary,
                       one_vs_all_auc, write_report_files)
from .features.lexicons import LexiconSet, load_demo_lexicons, load_lexicons
from .features.matrix import (FeatureMatrix, apply_imputer, apply_standardizer,
                              extract_matrix, fit_imputer, fit_standardizer,
                              write_matrix_csv)
from .features.registry import auto_production_names, named_features
from .figures import write_report_figures
from .learners import ModelSpec, grid_search_cv, save_model, train_model
from .resample import AdasynParams, ResampleOutcome, adasyn, adasyn_multiclass
from .stats import SelectionReport, select_features, write_selection_csv

logger = logging.getLogger(__name__)

TASKS = ("binary", "trinary")


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class Condition:
    name: str
    sources: tuple[str, ...]
    oversample: bool = False


@dataclass
class PipelineConfig:
    manifests: dict[str, str]
    task: str
    conditions: list[Condition]
    model_grid: list[ModelSpec]
    split_seeds: list[int]
    output_dir: str
    alpha: float = 0.005
    adasyn: AdasynParams = field(default_factory=AdasynParams)
    split_ratio: float = 0.8
    cv_folds: int = 10
    lexicons_path: str | None = None
    mmse_threshold: int = 10
    fk_plus: bool = False
    auto_productions: bool = False

    def __post_init__(self):
        if self.task not in TASKS:
            raise PipelineError(f"unknown task {self.task!r}")
        if not self.conditions:
            raise PipelineError("config lists no conditions")
        if not self.model_grid:
            raise PipelineError("config lists no model specs")
        if not self.split_seeds:
            raise PipelineError("config lists no split seeds")
        for cond in self.conditions:
            for src in cond.sources:
                if src not in self.manifests:
                    raise PipelineError(
                        f"condition {cond.name!r} references unknown source {src!r}")
        for src, path in self.manifests.items():
            if not Path(path).exists():
                raise PipelineError(f"manifest for {src!r} not found: {path}")

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | None = None) -> "PipelineConfig":
        base = base_dir or Path.cwd()

        def resolve(p: str) -> str:
            path = Path(p)
            return str(path if path.is_absolute() else base / path)

        conditions = [Condition(name=c["name"], sources=tuple(c["sources"]),
                                oversample=bool(c.get("oversample", False)))
                      for c in doc.get("conditions", [])]
        adasyn_doc = doc.get("adasyn", {})
        models = [ModelSpec.from_dict(m) for m in doc.get("models", [])]
        split = doc.get("split", {})
        lexicons = doc.get("lexicons")
        return cls(
            manifests={k: resolve(v) for k, v in doc.get("manifests", {}).items()},
            task=doc.get("task", "binary"),
            conditions=conditions,
            model_grid=models,
            split_seeds=[int(s) for s in split.get("seeds", [0])],
            output_dir=resolve(doc["output"]) if "output" in doc else str(base / "runs/out"),
            alpha=float(doc.get("alpha", 0.005)),
            adasyn=AdasynParams(beta=float(adasyn_doc.get("beta", 1.0)),
                                k=int(adasyn_doc.get("k", 5)),
                                seed=int(adasyn_doc.get("seed", 0))),
            split_ratio=float(split.get("ratio", 0.8)),
            cv_folds=int(doc.get("cv_folds", 10)),
            lexicons_path=resolve(lexicons) if lexicons else None,
            mmse_threshold=int(doc.get("mmse_threshold", 10)),
            fk_plus=bool(doc.get("fk_plus", False)),
            auto_productions=bool(doc.get("auto_productions", False)),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        doc = json.loads(path.read_text(encoding="utf-8"))
        return cls.from_dict(doc, base_dir=path.parent)


# ---------------------------------------------------------------------------
# Single condition/seed job

@dataclass
class TrainingArtifacts:
    """Everything fitted on training rows; the leakage tests fingerprint this."""
    imputer_means: np.ndarray
    standardizer_mean: np.ndarray
    standardizer_std: np.ndarray
    selection: SelectionReport
    selected_indices: list[int]
    resample: ResampleOutcome | None
    train_features: np.ndarray
    train_labels: np.ndarray
    train_groups: list[str]
    models: dict[str, object]          # model kind -> TrainedModel
    best_specs: dict[str, ModelSpec]

    def fingerprint(self) -> str:
        payload = pickle.dumps({
            "imputer": self.imputer_means,
            "std": (self.standardizer_mean, self.standardizer_std),
            "selected": self.selection.selected,
            "pvalues": {k: v.p_value for k, v in self.selection.per_feature.items()},
            "resample": None if self.resample is None else (
                self.resample.features, self.resample.labels,
                self.resample.synthetic_flags, self.resample.per_seed_counts),
            "train": (self.train_features, self.train_labels, self.train_groups),
            "models": {k: pickle.dumps(m, protocol=4) for k, m in sorted(self.models.items())},
        }, protocol=4)
        return hashlib.sha256(payload).hexdigest()


def fit_training_stages(matrix: FeatureMatrix, split: SplitAssignment,
                        *, alpha: float, oversample: bool,
                        adasyn_params: AdasynParams, model_grid: list[ModelSpec],
                        cv_folds: int, cv_seed: int) -> TrainingArtifacts:
    """Run every train-side stage; nothing here may read a test row."""
    train_idx = split.train_indices
    labels = np.asarray(matrix.labels)

    means = fit_imputer(matrix.values, train_idx)
    imputed = apply_imputer(matrix.values, means)
    std_mean, std_std = fit_standardizer(imputed, train_idx)
    standardized = apply_standardizer(imputed, std_mean, std_std)

    train_matrix = FeatureMatrix(
        feature_names=matrix.feature_names,
        values=standardized[train_idx],
        labels=[matrix.labels[i] for i in train_idx],
        groups=[matrix.groups[i] for i in train_idx],
        sample_ids=[matrix.sample_ids[i] for i in train_idx] if matrix.sample_ids else [])
    selection = select_features(train_matrix, alpha)
    if not selection.selected:
        raise PipelineError("ANOVA selected no features at alpha "
                            f"{alpha}; nothing to train on")
    sel_idx = selection.selected_indices(matrix.feature_names)

    x_train = standardized[np.ix_(train_idx, sel_idx)]
    y_train = labels[train_idx]
    groups_train = [matrix.groups[i] for i in train_idx]

    resample = None
    if oversample:
        if len(np.unique(y_train)) == 2:
            resample = adasyn(x_train, y_train, adasyn_params)
        else:
            resample = adasyn_multiclass(x_train, y_train, adasyn_params)
        x_train = resample.features
        y_train = resample.labels
        # synthetic rows stay grouped with the participant they were seeded from
        groups_train = groups_train + [groups_train[r] for r in resample.seed_rows]

    by_kind: dict[str, list[ModelSpec]] = {}
    for spec in model_grid:
        by_kind.setdefault(spec.kind, []).append(spec)

    models: dict[str, object] = {}
    best_specs: dict[str, ModelSpec] = {}
    for kind, specs in by_kind.items():
        cv = grid_search_cv(specs, x_train, y_train, groups_train,
                            folds=cv_folds, seed=cv_seed)
        best_specs[kind] = cv.best_spec
        models[kind] = train_model(x_train, y_train, cv.best_spec)

    return TrainingArtifacts(
        imputer_means=means, standardizer_mean=std_mean, standardizer_std=std_std,
        selection=selection, selected_indices=sel_idx, resample=resample,
        train_features=x_train, train_labels=y_train, train_groups=groups_train,
        models=models, best_specs=best_specs)


def evaluate_on_test(matrix: FeatureMatrix, split: SplitAssignment,
                     artifacts: TrainingArtifacts, classes: list[str]) -> dict:
    """Apply train-fitted transforms to the held-out rows and score models."""
    test_idx = split.test_indices
    labels = np.asarray(matrix.labels)
    imputed = apply_imputer(matrix.values, artifacts.imputer_means)
    standardized = apply_standardizer(imputed, artifacts.standardizer_mean,
                                      artifacts.standardizer_std)
    x_test = standardized[np.ix_(test_idx, artifacts.selected_indices)]
    y_test = labels[test_idx]

    results = {}
    for kind, model in artifacts.models.items():
        scores = model.predict_scores(x_test)
        predicted = model.predict(x_test)
        confusion, macro, micro = confusion_and_f1(y_test, predicted, classes=classes)
        try:
            aucs = one_vs_all_auc(scores, y_test, list(model.classes))
        except Exception as exc:
            logger.warning("AUC unavailable for %s: %s", kind, exc)
            aucs = {}
        results[kind] = {
            "f1_macro": macro,
            "f1_micro": micro,
            "auc": {str(c): float(v) for c, v in aucs.items()},
            "confusion": confusion.tolist(),
        }
    return results


# ---------------------------------------------------------------------------
# Full run

def _task_labels(dataset: CohortDataset, task: str, threshold: int) -> list[str]:
    if task == "binary":
        return [label_binary(s) for s in dataset.samples]
    return [label_trinary(s, threshold=threshold) for s in dataset.samples]


def _slug(name: str) -> str:
    return "".join(ch if ch.isalnum() else "-" for ch in name).strip("-").lower()


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class RunArtifacts:
    output_dir: Path
    report: EvalReport
    files: list[Path]
    log_path: Path


def run_pipeline(config: PipelineConfig) -> RunArtifacts:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    lexicons = (load_lexicons(config.lexicons_path) if config.lexicons_path
                else load_demo_lexicons())
    datasets = {src: load_manifest(path) for src, path in config.manifests.items()}

    classes = (["AD", "Control"] if config.task == "binary"
               else ["Control", "Mild", "Moderate"])
    model_kinds = list(dict.fromkeys(spec.kind for spec in config.model_grid))
    report = EvalReport(task=config.task,
                        conditions=[c.name for c in config.conditions],
                        models=model_kinds, classes=classes,
                        seeds=list(config.split_seeds))
    files: list[Path] = []
    log_records: list[dict] = []

    jobs = [(cond, seed) for cond in config.conditions
            for seed in config.split_seeds]
    runner = _ConditionSeedRunner(config, datasets, lexicons, classes, out_dir)

    max_workers = max(1, int(os.environ.get("COHORT_AUGMENT_THREADS", "1")))
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(lambda j: runner.run(*j), jobs))
    else:
        outcomes = [runner.run(*job) for job in jobs]

    failed_conditions: set[str] = set()
    for (cond, seed), outcome in zip(jobs, outcomes):
        if isinstance(outcome, _JobFailure):
            logger.error("condition %r seed %d failed: %s", cond.name, seed,
                         outcome.message)
            failed_conditions.add(cond.name)
            log_records.append({"condition": cond.name, "seed": seed,
                                "stage": "error", "error": outcome.message})
            continue
        files.extend(outcome.files)
        log_records.extend(outcome.log_records)
        report.selected_counts.setdefault(cond.name, []).append(outcome.n_selected)
        for kind, metrics in outcome.results.items():
            cell = report.cell(cond.name, kind)
            cell.f1_macro.append(metrics["f1_macro"])
            cell.f1_micro.append(metrics["f1_micro"])
            cell.confusion.append(metrics["confusion"])
            for cls, value in metrics["auc"].items():
                cell.auc.setdefault(cls, []).append(value)

    if not report.cells:
        raise PipelineError("every condition failed; nothing to report")

    files.extend(write_report_files(report, out_dir))
    files.extend(write_report_figures(report, out_dir))

    config_copy = out_dir / "config.json"
    config_copy.write_text(_config_document(config), encoding="utf-8")
    files.append(config_copy)

    log_path = out_dir / "run.log"
    with log_path.open("w", encoding="utf-8") as fh:
        for record in sorted(log_records,
                             key=lambda r: (r["condition"], r["seed"], r["stage"])):
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    return RunArtifacts(output_dir=out_dir, report=report, files=files,
                        log_path=log_path)


def _config_document(config: PipelineConfig) -> str:
    doc = {
        "task": config.task,
        "manifests": config.manifests,
        "conditions": [{"name": c.name, "sources": list(c.sources),
                        "oversample": c.oversample} for c in config.conditions],
        "alpha": config.alpha,
        "adasyn": {"beta": config.adasyn.beta, "k": config.adasyn.k,
                   "seed": config.adasyn.seed},
        "models": [spec.to_dict() for spec in config.model_grid],
        "split": {"ratio": config.split_ratio, "seeds": config.split_seeds},
        "cv_folds": config.cv_folds,
        "lexicons": config.lexicons_path,
        "mmse_threshold": config.mmse_threshold,
        "fk_plus": config.fk_plus,
        "auto_productions": config.auto_productions,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


class _JobFailure:
    def __init__(self, message: str):
        self.message = message


class _JobOutcome:
    def __init__(self, results: dict, files: list[Path], log_records: list[dict],
                 n_selected: int):
        self.results = results
        self.files = files
        self.log_records = log_records
        self.n_selected = n_selected


class _ConditionSeedRunner:
    def __init__(self, config: PipelineConfig, datasets: dict[str, CohortDataset],
                 lexicons: LexiconSet, classes: list[str], out_dir: Path):
        self.config = config
        self.datasets = datasets
        self.lexicons = lexicons
        self.classes = classes
        self.out_dir = out_dir

    def run(self, cond: Condition, seed: int):
        try:
            return self._run(cond, seed)
        except Exception as exc:
            return _JobFailure(f"{type(exc).__name__}: {exc}")

    def _run(self, cond: Condition, seed: int) -> _JobOutcome:
        config = self.config
        records: list[dict] = []
        job_dir = self.out_dir / "conditions" / _slug(cond.name) / f"seed{seed}"
        job_dir.mkdir(parents=True, exist_ok=True)
        files: list[Path] = []

        def stage(name: str):
            return _StageTimer(records, cond.name, seed, name)

        with stage("load"):
            dataset = self.datasets[cond.sources[0]]
            for src in cond.sources[1:]:
                dataset = dataset.merged_with(self.datasets[src])
            labels = _task_labels(dataset, config.task, config.mmse_threshold)

        with stage("extract"):
            registry = named_features(self.lexicons)
            if config.auto_productions:
                registry = registry + auto_production_names(dataset)
            matrix = extract_matrix(dataset, registry, self.lexicons,
                                    labels=labels, fk_plus=config.fk_plus)
            features_csv = job_dir / "features.csv"
            write_matrix_csv(matrix, features_csv)
            files.append(features_csv)

        with stage("split"):
            split = grouped_split(matrix.groups, config.split_ratio, seed)

        with stage("train"):
            adasyn_params = AdasynParams(
                beta=config.adasyn.beta, k=config.adasyn.k,
                seed=config.adasyn.seed + seed * 100003)
            artifacts = fit_training_stages(
                matrix, split, alpha=config.alpha, oversample=cond.oversample,
                adasyn_params=adasyn_params, model_grid=config.model_grid,
                cv_folds=config.cv_folds, cv_seed=seed)
            selection_csv = job_dir / "selection.csv"
            write_selection_csv(artifacts.selection, selection_csv)
            files.append(selection_csv)
            if artifacts.resample is not None:
                resample_csv = job_dir / "resample.csv"
                _write_resample_csv(artifacts, matrix, split, resample_csv)
                files.append(resample_csv)
            for kind, model in sorted(artifacts.models.items()):
                model_path = job_dir / f"model_{kind}.json"
                save_model(model, model_path)
                files.append(model_path)

        with stage("evaluate"):
            results = evaluate_on_test(matrix, split, artifacts, self.classes)
            metrics_path = job_dir / "metrics.json"
            metrics_path.write_text(json.dumps(results, indent=2, sort_keys=True),
                                    encoding="utf-8")
            files.append(metrics_path)

        for path in files:
            records.append({"condition": cond.name, "seed": seed,
                            "stage": f"artifact:{path.name}",
                            "sha256": _sha256_file(path)})
        return _JobOutcome(results=results, files=files, log_records=records,
                           n_selected=len(artifacts.selection.selected))


def _write_resample_csv(artifacts: TrainingArtifacts, matrix: FeatureMatrix,
                        split: SplitAssignment, path: Path) -> None:
    resample = artifacts.resample
    names = [matrix.feature_names[i] for i in artifacts.selected_indices]
    n_orig = len(split.train_indices)
    groups = artifacts.train_groups
    sample_ids = []
    for i in range(resample.features.shape[0]):
        if i < n_orig and matrix.sample_ids:
            sample_ids.append(matrix.sample_ids[split.train_indices[i]])
        else:
            sample_ids.append(f"synthetic-{i - n_orig}")
    out = FeatureMatrix(feature_names=names, values=resample.features,
                        labels=[str(l) for l in resample.labels],
                        groups=groups, sample_ids=sample_ids)
    write_matrix_csv(out, path, synthetic_flags=resample.synthetic_flags.tolist())


class _StageTimer:
    def __init__(self, records: list[dict], condition: str, seed: int, stage: str):
        self.records = records
        self.condition = condition
        self.seed = seed
        self.stage = stage

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.records.append({
            "condition": self.condition, "seed": self.seed,
            "stage": self.stage,
            "elapsed_s": round(time.perf_counter() - self.start, 6),
            "ok": exc_type is None,
        })
        return False
