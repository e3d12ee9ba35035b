"""Command-line interface: batch subcommands over the pipeline stages.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

_EFFECT_PRESETS = {"none": 0.0, "small": 0.3, "large": 1.0}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cohort-augment",
                     description="Desk-scale speech-impairment classification "
                                 "pipeline: features, ANOVA selection, ADASYN, "
                                 "four classifiers, grouped evaluation.")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log at INFO level")
    sub = parser.add_subparsers(dest="command", metavar="command",
                              parser_class=_Parser)

    p = sub.add_parser("synth",
                       help="generate a synthetic cohort with planted effects")
    p.add_argument("--control", type=int, required=True)
    p.add_argument("--impaired", type=int, required=True)
    p.add_argument("--effect", default="large",
                   help="none | small | large | float in [0,1]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("ingest",
                       help="load a manifest and validate the cohort")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="optional summary JSON path")

    p = sub.add_parser("extract",
                       help="extract the feature matrix for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="feature CSV path")
    p.add_argument("--lexicons", help="lexicon file (default: bundled demo)")
    p.add_argument("--task", choices=["binary", "trinary"], default="binary")
    p.add_argument("--mmse-threshold", type=int, default=10)
    p.add_argument("--fk-plus", action="store_true",
                   help="use the +15.59 grade-level constant")
    p.add_argument("--auto-productions", action="store_true",
                   help="add a ratio feature for every observed production")

    p = sub.add_parser("select",
                       help="ANOVA feature selection over a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--alpha", type=float, default=0.005)
    p.add_argument("--out", required=True, help="selection report CSV")

    p = sub.add_parser("resample",
                       help="ADASYN-oversample a labeled feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train",
                       help="train one model on a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--kind", choices=["random_forest", "gradient_boosting",
                                      "svm_rbf", "mlp"])
    p.add_argument("--spec", help="JSON file with a full model spec")
    p.add_argument("--param", action="append", default=[],
                   metavar="KEY=VALUE", help="hyperparameter override")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model file")

    p = sub.add_parser("eval",
                       help="evaluate a saved model on a feature CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", help="metrics JSON path")

    p = sub.add_parser("pipeline",
                       help="run the full experiment grid from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override the config's output directory")

    p = sub.add_parser("report",
                       help="re-render tables and figures from a finished run")
    p.add_argument("--run", required=True, help="pipeline output directory")
    p.add_argument("--format", choices=["csv", "markdown", "both"],
                   default="both")
    return parser


# ---------------------------------------------------------------------------
# Subcommand bodies

def _cmd_synth(args) -> int:
    from .corpus.synthetic import (SyntheticSpec, generate_synthetic_cohort,
                                   sample_to_chat)
    from .corpus.treebank import format_trees

    try:
        effect = _EFFECT_PRESETS.get(args.effect, None)
        if effect is None:
            effect = float(args.effect)
    except ValueError:
        raise _UsageError(f"bad --effect value {args.effect!r}")

    spec = SyntheticSpec(n_control=args.control, n_impaired=args.impaired,
                         effect=effect)
    cohort = generate_synthetic_cohort(spec, seed=args.seed)

    out = Path(args.out)
    (out / "transcripts").mkdir(parents=True, exist_ok=True)
    (out / "trees").mkdir(parents=True, exist_ok=True)
    records = []
    for sample in cohort.samples:
        tpath = out / "transcripts" / f"{sample.sample_id}.cha"
        tpath.write_text(sample_to_chat(sample), encoding="utf-8")
        wpath = out / "trees" / f"{sample.sample_id}.trees"
        wpath.write_text(format_trees([u.tree for u in sample.utterances]),
                         encoding="utf-8")
        records.append({
            "transcript": f"transcripts/{sample.sample_id}.cha",
            "trees": f"trees/{sample.sample_id}.trees",
            "participant_id": sample.participant_id,
            "sample_id": sample.sample_id,
            "diagnosis": sample.diagnosis,
            "mmse": sample.mmse,
            "source": "SYNTH",
        })
    manifest = out / "manifest.json"
    manifest.write_text(json.dumps({"samples": records}, indent=2),
                        encoding="utf-8")
    print(f"wrote {len(records)} samples "
          f"({args.control} control, {args.impaired} impaired) to {out}")
    print(f"manifest: {manifest}")
    return 0


def _cmd_ingest(args) -> int:
    from .corpus.manifest import load_manifest

    dataset = load_manifest(args.manifest)
    by_diagnosis: dict[str, int] = {}
    by_source: dict[str, int] = {}
    for s in dataset.samples:
        by_diagnosis[s.diagnosis] = by_diagnosis.get(s.diagnosis, 0) + 1
        by_source[s.source] = by_source.get(s.source, 0) + 1
    summary = {
        "samples": len(dataset),
        "participants": len(set(dataset.participant_ids)),
        "by_diagnosis": by_diagnosis,
        "by_source": by_source,
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    if args.out:
        Path(args.out).write_text(json.dumps(summary, indent=2, sort_keys=True),
                                  encoding="utf-8")
    return 0


def _load_lexicons(path: str | None):
    from .features.lexicons import load_demo_lexicons, load_lexicons
    return load_lexicons(path) if path else load_demo_lexicons()


def _cmd_extract(args) -> int:
    from .corpus.manifest import load_manifest
    from .evaluate import label_binary, label_trinary
    from .features.matrix import extract_matrix, write_matrix_csv
    from .features.registry import auto_production_names, named_features

    dataset = load_manifest(args.manifest)
    lexicons = _load_lexicons(args.lexicons)
    registry = named_features(lexicons)
    if args.auto_productions:
        registry = registry + auto_production_names(dataset)
    if args.task == "binary":
        labels = [label_binary(s) for s in dataset.samples]
    else:
        labels = [label_trinary(s, threshold=args.mmse_threshold)
                  for s in dataset.samples]
    matrix = extract_matrix(dataset, registry, lexicons, labels=labels,
                            fk_plus=args.fk_plus)
    write_matrix_csv(matrix, args.out)
    print(f"wrote {matrix.values.shape[0]} x {matrix.values.shape[1]} "
          f"feature matrix to {args.out}")
    return 0


def _cmd_select(args) -> int:
    from .features.matrix import read_matrix_csv
    from .stats import select_features, write_selection_csv

    matrix = read_matrix_csv(args.features)
    report = select_features(matrix, args.alpha)
    write_selection_csv(report, args.out)
    print(f"selected {len(report.selected)} of {len(matrix.feature_names)} "
          f"features at alpha={args.alpha}")
    return 0


def _cmd_resample(args) -> int:
    from .features.matrix import FeatureMatrix, read_matrix_csv, write_matrix_csv
    from .resample import AdasynParams, adasyn, adasyn_multiclass

    matrix = read_matrix_csv(args.features)
    if np.isnan(matrix.values).any():
        raise ValueError("resample needs a complete matrix; "
                         "impute or drop missing values first")
    params = AdasynParams(beta=args.beta, k=args.k, seed=args.seed)
    labels = np.asarray(matrix.labels)
    if len(np.unique(labels)) == 2:
        outcome = adasyn(matrix.values, labels, params)
    else:
        outcome = adasyn_multiclass(matrix.values, labels, params)
    n_orig = matrix.values.shape[0]
    groups = list(matrix.groups) + [matrix.groups[r] for r in outcome.seed_rows]
    ids = list(matrix.sample_ids) + [f"synthetic-{i}" for i in
                                     range(outcome.features.shape[0] - n_orig)]
    out_matrix = FeatureMatrix(feature_names=matrix.feature_names,
                               values=outcome.features,
                               labels=[str(l) for l in outcome.labels],
                               groups=groups, sample_ids=ids)
    write_matrix_csv(out_matrix, args.out,
                     synthetic_flags=outcome.synthetic_flags.tolist())
    print(f"resampled {n_orig} rows to {outcome.features.shape[0]} "
          f"({int(outcome.synthetic_flags.sum())} synthetic)")
    return 0


def _parse_param(text: str):
    key, sep, value = text.partition("=")
    if not sep:
        raise _UsageError(f"--param needs KEY=VALUE, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def _cmd_train(args) -> int:
    from .features.matrix import read_matrix_csv
    from .learners import ModelSpec, save_model, train_model

    if bool(args.spec) == bool(args.kind):
        raise _UsageError("give exactly one of --kind or --spec")
    if args.spec:
        spec = ModelSpec.from_dict(json.loads(Path(args.spec).read_text(encoding="utf-8")))
    else:
        hyper = dict(_parse_param(p) for p in args.param)
        spec = ModelSpec(kind=args.kind, hyperparameters=hyper, seed=args.seed)
    matrix = read_matrix_csv(args.features)
    if np.isnan(matrix.values).any():
        raise ValueError("training needs a complete matrix; "
                         "impute or drop missing values first")
    model = train_model(matrix.values, np.asarray(matrix.labels), spec)
    save_model(model, args.out)
    print(f"trained {spec.kind} on {matrix.values.shape[0]} rows; "
          f"saved to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    from .evaluate import confusion_and_f1, one_vs_all_auc
    from .features.matrix import read_matrix_csv
    from .learners import load_model

    model = load_model(args.model)
    matrix = read_matrix_csv(args.features)
    scores = model.predict_scores(matrix.values)
    predicted = model.predict(matrix.values)
    labels = np.asarray(matrix.labels)
    classes = sorted(set(matrix.labels) | set(str(c) for c in model.classes))
    confusion, macro, micro = confusion_and_f1(labels, predicted, classes=classes)
    try:
        aucs = one_vs_all_auc(scores, labels, list(model.classes))
    except Exception as exc:
        logger.warning("AUC unavailable: %s", exc)
        aucs = {}
    metrics = {"f1_macro": macro, "f1_micro": micro,
               "auc": {str(c): float(v) for c, v in aucs.items()},
               "confusion": confusion.tolist(), "classes": classes}
    print(json.dumps(metrics, indent=2, sort_keys=True))
    if args.out:
        Path(args.out).write_text(json.dumps(metrics, indent=2, sort_keys=True),
                                  encoding="utf-8")
    return 0


def _cmd_pipeline(args) -> int:
    from .pipeline import PipelineConfig, run_pipeline

    config = PipelineConfig.from_file(args.config)
    if args.out:
        config.output_dir = str(Path(args.out))
    artifacts = run_pipeline(config)
    print(f"pipeline finished; {len(artifacts.files)} artifact files in "
          f"{artifacts.output_dir}")
    return 0


def _cmd_report(args) -> int:
    from .evaluate import EvalReport, render_report, write_report_files
    from .figures import write_report_figures

    run_dir = Path(args.run)
    report_files = sorted(run_dir.glob("report_*.json"))
    if not report_files:
        raise FileNotFoundError(f"no report_*.json under {run_dir}")
    for path in report_files:
        report = EvalReport.from_json(path.read_text(encoding="utf-8"))
        if args.format in ("csv", "markdown"):
            for name, text in render_report(report, args.format).items():
                suffix = "csv" if args.format == "csv" else "md"
                (run_dir / f"report_{name}.{suffix}").write_text(text, encoding="utf-8")
        else:
            write_report_files(report, run_dir)
        write_report_figures(report, run_dir)
        print(f"rendered {report.task} report from {path.name}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "ingest": _cmd_ingest,
    "extract": _cmd_extract,
    "select": _cmd_select,
    "resample": _cmd_resample,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "pipeline": _cmd_pipeline,
    "report": _cmd_report,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:      # --help
        return int(exc.code or 0)

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.command:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        if os.environ.get("COHORT_AUGMENT_DEBUG"):
            raise
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
