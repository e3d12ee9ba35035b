"""Feature matrix assembly, CSV round-trip, and train-fitted transforms."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..corpus.model import CohortDataset
from .extractors import (lexical_features, lexicon_features, parse_production_name,
                         readability_features, semantic_similarity_features,
                         syntactic_features, valence_features)
from .lexicons import LexiconSet
from .registry import (LEXICAL_NAMES, READABILITY_NAMES, SIMILARITY_NAMES,
                       SYNTACTIC_NAMES, validate_registry)

logger = logging.getLogger(__name__)


@dataclass
class FeatureMatrix:
    feature_names: list[str]
    values: np.ndarray            # (n_samples, n_features) float64, NaN = missing
    labels: list[str]
    groups: list[str]             # participant ids
    sample_ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        n = self.values.shape[0]
        if len(self.labels) != n or len(self.groups) != n:
            raise ValueError("labels/groups length does not match row count")
        if self.values.shape[1] != len(self.feature_names):
            raise ValueError("column count does not match feature names")

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.feature_names.index(name)]


def compute_features(sample, names: list[str], lexicons: LexiconSet,
                     fk_plus: bool = False) -> dict[str, float | None]:
    """Feature vector for one sample over the requested registry names."""
    wanted = set(names)
    out: dict[str, float | None] = {}
    if wanted & set(LEXICAL_NAMES):
        out.update(lexical_features(sample))
    syntactic_wanted = [n for n in names
                        if n in SYNTACTIC_NAMES or parse_production_name(n)]
    extra = [n for n in syntactic_wanted if n not in SYNTACTIC_NAMES]
    if syntactic_wanted:
        out.update(syntactic_features(sample, extra_productions=extra))
    if wanted & set(SIMILARITY_NAMES):
        out.update(semantic_similarity_features(sample))
    if wanted & set(READABILITY_NAMES):
        out.update(readability_features(sample, fk_plus=fk_plus))
    if "apostro" in wanted or any(n.startswith("lex_") for n in wanted):
        out.update(lexicon_features(sample, lexicons))
    if "mean_neg_valence" in wanted:
        out.update(valence_features(sample, lexicons))
    return {n: out[n] for n in names}


def extract_matrix(dataset: CohortDataset, registry: list[str],
                   lexicons: LexiconSet, labels: list[str] | None = None,
                   fk_plus: bool = False) -> FeatureMatrix:
    """Rows in dataset order, columns in registry order, NaN for missing."""
    validate_registry(registry, lexicons)
    if labels is None:
        labels = dataset.diagnoses
    values = np.full((len(dataset), len(registry)), np.nan)
    for i, sample in enumerate(dataset.samples):
        vec = compute_features(sample, registry, lexicons, fk_plus=fk_plus)
        for j, name in enumerate(registry):
            v = vec[name]
            if v is not None:
                if not math.isfinite(v):
                    raise ValueError(f"non-finite value for {name} in {sample.sample_id}")
                values[i, j] = v
    for j, name in enumerate(registry):
        frac = float(np.isnan(values[:, j]).mean())
        if frac > 0.5:
            logger.warning("feature %s missing for %.0f%% of samples "
                           "(column retained)", name, 100 * frac)
    return FeatureMatrix(feature_names=list(registry), values=values,
                         labels=list(labels), groups=dataset.participant_ids,
                         sample_ids=[s.sample_id for s in dataset.samples])


# ---------------------------------------------------------------------------
# CSV round-trip: header participant_id, sample_id, label, then features;
# '.' decimal, empty cell = missing.

def write_matrix_csv(matrix: FeatureMatrix, path: str | Path,
                     synthetic_flags: list[bool] | None = None) -> None:
    path = Path(path)
    header = ["participant_id", "sample_id", "label"] + matrix.feature_names
    if synthetic_flags is not None:
        header.append("synthetic_flag")
    sample_ids = matrix.sample_ids or [""] * len(matrix.labels)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(matrix.values.shape[0]):
            row = [matrix.groups[i], sample_ids[i], matrix.labels[i]]
            row += ["" if np.isnan(v) else repr(float(v)) for v in matrix.values[i]]
            if synthetic_flags is not None:
                row.append("1" if synthetic_flags[i] else "0")
            writer.writerow(row)


def read_matrix_csv(path: str | Path) -> FeatureMatrix:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:3] != ["participant_id", "sample_id", "label"]:
            raise ValueError(f"{path}: not a feature matrix CSV")
        feature_names = header[3:]
        if feature_names and feature_names[-1] == "synthetic_flag":
            feature_names = feature_names[:-1]
        groups, sample_ids, labels, rows = [], [], [], []
        for row in reader:
            groups.append(row[0])
            sample_ids.append(row[1])
            labels.append(row[2])
            rows.append([float(c) if c != "" else np.nan
                         for c in row[3:3 + len(feature_names)]])
    values = np.array(rows, dtype=float) if rows else np.empty((0, len(feature_names)))
    return FeatureMatrix(feature_names=feature_names, values=values,
                         labels=labels, groups=groups, sample_ids=sample_ids)


# ---------------------------------------------------------------------------
# Train-fitted column transforms. Parameters come from training rows only and
# are applied everywhere, so test rows never influence them.

def fit_imputer(values: np.ndarray, train_rows: np.ndarray) -> np.ndarray:
    """Column means over non-missing training values; 0.0 for all-missing."""
    train = values[train_rows]
    with np.errstate(invalid="ignore"):
        means = np.nanmean(train, axis=0)
    all_missing = np.isnan(means)
    if all_missing.any():
        logger.warning("%d columns missing on every training row; imputing 0",
                       int(all_missing.sum()))
        means = np.where(all_missing, 0.0, means)
    return means


def apply_imputer(values: np.ndarray, means: np.ndarray) -> np.ndarray:
    out = values.copy()
    nan_r, nan_c = np.where(np.isnan(out))
    out[nan_r, nan_c] = means[nan_c]
    return out


def fit_standardizer(values: np.ndarray, train_rows: np.ndarray
                     ) -> tuple[np.ndarray, np.ndarray]:
    train = values[train_rows]
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return mean, std


def apply_standardizer(values: np.ndarray, mean: np.ndarray,
                       std: np.ndarray) -> np.ndarray:
    return (values - mean) / std
