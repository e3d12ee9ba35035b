"""Figure rendering for evaluation reports.

Grouped bar charts mirror the result tables: conditions along the x axis,
one bar per model, error bars showing the across-seed standard deviation.
PNGs are written with fixed metadata so identical reports produce identical
bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .evaluate import EvalReport, auc_report_classes

_SAVE_KWARGS = {"dpi": 120, "metadata": {"Software": None}}


def _bar_chart(report: EvalReport, metric: str, cls: str | None,
               title: str, ylabel: str, path: Path) -> None:
    conditions = report.conditions
    models = report.models
    x = np.arange(len(conditions))
    width = 0.8 / max(len(models), 1)

    fig, ax = plt.subplots(figsize=(1.8 + 1.4 * len(conditions), 4.0))
    for mi, model in enumerate(models):
        means, sds = [], []
        for condition in conditions:
            cell = report.cells.get((condition, model))
            values: list[float] = []
            if cell is not None:
                if metric == "auc":
                    values = cell.auc.get(cls, [])
                else:
                    values = getattr(cell, metric)
            means.append(float(np.mean(values)) if values else np.nan)
            sds.append(float(np.std(values)) if len(values) > 1 else 0.0)
        offset = (mi - (len(models) - 1) / 2.0) * width
        ax.bar(x + offset, means, width, yerr=sds, capsize=2, label=model)
    ax.set_xticks(x)
    ax.set_xticklabels(conditions, rotation=15, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_ylim(0.0, 1.05)
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def write_report_figures(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """One figure per metric family, next to the CSV/Markdown tables."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    for metric, label in (("f1_macro", "F1 (macro)"), ("f1_micro", "F1 (micro)")):
        path = out_dir / f"fig_{report.task}_{metric}.png"
        _bar_chart(report, metric, None,
                   f"{label}, {report.task} task", label, path)
        written.append(path)

    for cls in auc_report_classes(report):
        path = out_dir / f"fig_{report.task}_auc_{cls}.png"
        _bar_chart(report, "auc", cls,
                   f"One-vs-all AUC for {cls}, {report.task} task", "AUC", path)
        written.append(path)
    return written
