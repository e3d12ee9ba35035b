"""Participant-grouped splitting, severity labeling, and evaluation metrics,
plus rendering of result tables (conditions as rows, models as column groups)."""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

CONTROL = "Control"
MILD = "Mild"
MODERATE = "Moderate"


class EvalError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Splitting and labeling

@dataclass
class SplitAssignment:
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int
    ratio: float


def grouped_split(groups: list[str], ratio: float, seed: int) -> SplitAssignment:
    """Shuffle participants and fill the training side to ratio * N rows.

    No participant ever lands on both sides. Groups larger than the training
    budget make the achieved ratio approximate (warned, still valid).
    """
    if not 0.0 < ratio < 1.0:
        raise EvalError(f"ratio {ratio} outside (0, 1)")
    unique = list(dict.fromkeys(groups))
    if len(unique) < 2:
        raise EvalError("need at least two participants to split")
    n = len(groups)
    sizes = {g: 0 for g in unique}
    for g in groups:
        sizes[g] += 1
    if max(sizes.values()) > ratio * n:
        warnings.warn("a participant exceeds the training budget; "
                      "achieved ratio will be approximate")

    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    order = rng.permutation(len(unique))
    train_groups: set[str] = set()
    count = 0
    target = ratio * n
    for gi in order:
        g = unique[gi]
        if count < target:
            train_groups.add(g)
            count += sizes[g]
    if len(train_groups) == len(unique):
        # degenerate budget: keep the last-assigned participant for testing
        last = unique[order[-1]]
        train_groups.discard(last)
        warnings.warn("training budget consumed every participant; "
                      "moved one back to the test side")

    groups_arr = np.asarray(groups)
    train_mask = np.isin(groups_arr, sorted(train_groups))
    return SplitAssignment(train_indices=np.flatnonzero(train_mask),
                           test_indices=np.flatnonzero(~train_mask),
                           seed=seed, ratio=ratio)


def label_trinary(sample, threshold: int = 10) -> str:
    """Control stays Control; AD maps by MMSE to Mild (above threshold) or
    Moderate (at or below)."""
    if sample.diagnosis == CONTROL:
        return CONTROL
    if sample.mmse is None:
        raise EvalError(f"sample {sample.sample_id!r} is AD without an MMSE score")
    return MILD if sample.mmse > threshold else MODERATE


def label_binary(sample) -> str:
    return sample.diagnosis


# ---------------------------------------------------------------------------
# Metrics

def confusion_and_f1(y_true, y_pred, classes: list | None = None):
    """Confusion matrix and (macro, micro) F1.

    Per-class scores use the 0/0 -> 0 convention; macro weights classes
    equally, micro pools counts (equals accuracy for single-label tasks).
    """
    y_true = list(y_true)
    y_pred = list(y_pred)
    if not y_true or len(y_true) != len(y_pred):
        raise EvalError("need equal, non-empty truth and prediction lists")
    if classes is None:
        classes = sorted(set(y_true) | set(y_pred))
    index = {c: i for i, c in enumerate(classes)}
    k = len(classes)
    confusion = np.zeros((k, k), dtype=int)
    for t, p in zip(y_true, y_pred):
        if t not in index or p not in index:
            raise EvalError(f"label outside the known class set: {t!r}/{p!r}")
        confusion[index[t], index[p]] += 1

    f1_per_class = []
    for i in range(k):
        tp = confusion[i, i]
        fp = confusion[:, i].sum() - tp
        fn = confusion[i, :].sum() - tp
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        f1_per_class.append(f1)
    macro = float(np.mean(f1_per_class))

    tp_total = int(np.trace(confusion))
    fp_total = int(confusion.sum() - np.trace(confusion))
    fn_total = fp_total                      # single-label: every FP is some FN
    micro_p = tp_total / (tp_total + fp_total) if tp_total + fp_total else 0.0
    micro_r = tp_total / (tp_total + fn_total) if tp_total + fn_total else 0.0
    micro = (2 * micro_p * micro_r / (micro_p + micro_r)
             if micro_p + micro_r else 0.0)
    return confusion, macro, micro


def roc_auc(scores, labels) -> float:
    """Area under the ROC curve by the rank statistic: the fraction of
    (positive, negative) pairs ranked correctly, ties counting one half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EvalError("AUC undefined: one class absent")
    ranks = _average_ranks(scores)
    rank_sum = float(ranks[labels].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    sorted_vals = values[order]
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def one_vs_all_auc(score_matrix: np.ndarray, labels, classes: list) -> dict:
    """Per-class AUC, each class in turn against the rest."""
    labels = np.asarray(labels)
    present = set(labels.tolist())
    if len(present) < 2:
        raise EvalError("one-vs-all AUC needs at least two classes present")
    score_matrix = np.asarray(score_matrix, dtype=float)
    out = {}
    for j, cls in enumerate(classes):
        if cls in present:
            out[cls] = roc_auc(score_matrix[:, j], labels == cls)
    return out


# ---------------------------------------------------------------------------
# Evaluation report

@dataclass
class CellMetrics:
    f1_macro: list[float] = field(default_factory=list)
    f1_micro: list[float] = field(default_factory=list)
    auc: dict[str, list[float]] = field(default_factory=dict)
    confusion: list[list[list[int]]] = field(default_factory=list)


@dataclass
class EvalReport:
    task: str                                   # "binary" | "trinary"
    conditions: list[str]
    models: list[str]
    classes: list[str]
    seeds: list[int]
    cells: dict[tuple[str, str], CellMetrics] = field(default_factory=dict)
    selected_counts: dict[str, list[int]] = field(default_factory=dict)

    def cell(self, condition: str, model: str) -> CellMetrics:
        key = (condition, model)
        if key not in self.cells:
            self.cells[key] = CellMetrics()
        return self.cells[key]

    # -- JSON round-trip ----------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "task": self.task, "conditions": self.conditions,
            "models": self.models, "classes": self.classes, "seeds": self.seeds,
            "selected_counts": self.selected_counts,
            "cells": {f"{c}␟{m}": {
                "f1_macro": v.f1_macro, "f1_micro": v.f1_micro, "auc": v.auc,
                "confusion": v.confusion}
                for (c, m), v in self.cells.items()},
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        doc = json.loads(text)
        report = cls(task=doc["task"], conditions=doc["conditions"],
                     models=doc["models"], classes=doc["classes"],
                     seeds=doc["seeds"],
                     selected_counts=doc.get("selected_counts", {}))
        for key, v in doc.get("cells", {}).items():
            condition, model = key.split("␟")
            report.cells[(condition, model)] = CellMetrics(
                f1_macro=v["f1_macro"], f1_micro=v["f1_micro"],
                auc=v["auc"], confusion=v["confusion"])
        return report


def _fmt(values: list[float], percent: bool = True) -> str:
    if not values:
        return "—"
    scale = 100.0 if percent else 1.0
    mean = float(np.mean(values)) * scale
    if len(values) == 1:
        return f"{mean:.2f}"
    sd = float(np.std(values)) * scale
    return f"{mean:.2f} ± {sd:.2f}"


def auc_report_classes(report: EvalReport) -> list[str]:
    if report.task == "trinary":
        return [c for c in (MODERATE, MILD) if c in report.classes]
    non_control = [c for c in report.classes if c != CONTROL]
    return non_control[:1] or report.classes[:1]


def render_report(report: EvalReport, fmt: str) -> dict[str, str]:
    """Tables keyed by name: F1 per condition x model, AUC per condition x
    model (per reported class), and selected-feature counts per condition.

    Markdown marks the three highest mean macro-F1 cells in bold. Missing
    cells render as an em dash and log a warning.
    """
    if fmt not in ("csv", "markdown"):
        raise EvalError(f"unknown report format {fmt!r}")
    if not report.cells:
        raise EvalError("empty report: no cells to render")

    tables: dict[str, str] = {}
    missing: list[str] = []

    # -- F1 table ------------------------------------------------------------
    macro_means = {}
    for condition in report.conditions:
        for model in report.models:
            cell = report.cells.get((condition, model))
            if cell is None or not cell.f1_macro:
                missing.append(f"{condition}/{model}")
                continue
            macro_means[(condition, model)] = float(np.mean(cell.f1_macro))
    top3 = set(sorted(macro_means, key=macro_means.get, reverse=True)[:3])

    header = ["condition"]
    for model in report.models:
        header += [f"{model} F1 macro", f"{model} F1 micro"]
    rows = []
    for condition in report.conditions:
        row = [condition]
        for model in report.models:
            cell = report.cells.get((condition, model))
            if cell is None or not cell.f1_macro:
                row += ["—", "—"]
                continue
            macro = _fmt(cell.f1_macro)
            if fmt == "markdown" and (condition, model) in top3:
                macro = f"**{macro}**"
            row += [macro, _fmt(cell.f1_micro)]
        rows.append(row)
    tables[f"{report.task}_f1"] = _render_table(header, rows, fmt,
                                                title=f"F1 scores ({report.task} task)")

    # -- AUC table -----------------------------------------------------------
    auc_classes = auc_report_classes(report)
    header = ["condition"]
    for model in report.models:
        for cls in auc_classes:
            header.append(f"{model} AUC {cls}" if len(auc_classes) > 1
                          else f"{model} AUC")
    rows = []
    for condition in report.conditions:
        row = [condition]
        for model in report.models:
            cell = report.cells.get((condition, model))
            for cls in auc_classes:
                if cell is None or cls not in cell.auc or not cell.auc[cls]:
                    row.append("—")
                else:
                    row.append(_fmt(cell.auc[cls], percent=False))
        rows.append(row)
    tables[f"{report.task}_auc"] = _render_table(header, rows, fmt,
                                                 title=f"AUC ({report.task} task)")

    # -- selected features ----------------------------------------------------
    if report.selected_counts:
        header = ["condition", "selected features"]
        rows = [[c, _fmt([float(v) for v in report.selected_counts.get(c, [])],
                         percent=False)]
                for c in report.conditions]
        tables[f"{report.task}_selected"] = _render_table(
            header, rows, fmt, title=f"ANOVA-selected features ({report.task} task)")

    if missing:
        logger.warning("report missing cells: %s", ", ".join(missing))
    return tables


def _render_table(header: list[str], rows: list[list[str]], fmt: str,
                  title: str) -> str:
    if fmt == "csv":
        lines = [",".join(_csv_escape(c) for c in header)]
        lines += [",".join(_csv_escape(c) for c in row) for row in rows]
        return "\n".join(lines) + "\n"
    lines = [f"### {title}", ""]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "|".join(["---"] * len(header)) + "|")
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def _csv_escape(cell: str) -> str:
    if any(ch in cell for ch in ",\"\n"):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def write_report_files(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Emit one CSV and one Markdown file per table, plus the JSON report."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    json_path = out_dir / f"report_{report.task}.json"
    json_path.write_text(report.to_json(), encoding="utf-8")
    written.append(json_path)
    for fmt, suffix in (("csv", "csv"), ("markdown", "md")):
        for name, text in render_report(report, fmt).items():
            path = out_dir / f"report_{name}.{suffix}"
            path.write_text(text, encoding="utf-8")
            written.append(path)
    return written
