"""Model specs, the trained-model contract, and model persistence."""

from __future__ import annotations

import base64
import json
import pickle
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

RANDOM_FOREST = "random_forest"
GRADIENT_BOOSTING = "gradient_boosting"
SVM_RBF = "svm_rbf"
MLP = "mlp"
KINDS = (RANDOM_FOREST, GRADIENT_BOOSTING, SVM_RBF, MLP)

# Default hyperparameters per kind; any value can be overridden in a ModelSpec.
DEFAULT_HYPERPARAMETERS: dict[str, dict] = {
    RANDOM_FOREST: {"trees": 100},
    GRADIENT_BOOSTING: {"trees": 1000, "depth": 5, "learning_rate": 0.1},
    SVM_RBF: {"gamma": 0.001, "c": 1.0, "tol": 1e-3, "max_sweeps": 2000},
    MLP: {"layers": 4, "units": 512, "dropout": 0.1, "epochs": 100,
          "batch_size": 100, "learning_rate": 0.1},
}


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown model kind {self.kind!r}")
        defaults = DEFAULT_HYPERPARAMETERS[self.kind]
        unknown = set(self.hyperparameters) - set(defaults)
        if unknown:
            raise ModelError(f"{self.kind}: unknown hyperparameters {sorted(unknown)}")
        merged = {**defaults, **self.hyperparameters}
        object.__setattr__(self, "hyperparameters", merged)

    def __getitem__(self, key: str):
        return self.hyperparameters[key]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "hyperparameters": dict(self.hyperparameters),
                "seed": self.seed}

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelSpec":
        return cls(kind=doc["kind"], hyperparameters=dict(doc.get("hyperparameters", {})),
                   seed=int(doc.get("seed", 0)))


class TrainedModel:
    """Fitted predictor: per-class scores that sum to one on every row."""

    def __init__(self, spec: ModelSpec, classes: np.ndarray, n_features: int):
        self.spec = spec
        self.classes = np.asarray(classes)
        self.n_features = n_features

    def _check_input(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ModelError(
                f"expected {self.n_features} feature columns, got shape {X.shape}")
        return X

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X: np.ndarray) -> np.ndarray:
        scores = self.predict_scores(X)
        # argmax takes the first maximum, i.e. the lowest class index on ties
        return self.classes[np.argmax(scores, axis=1)]


class ConstantModel(TrainedModel):
    """Degenerate fit on single-class training data."""

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        X = self._check_input(X)
        return np.ones((X.shape[0], 1))


def constant_model_if_single_class(spec, classes, n_features) -> ConstantModel | None:
    if len(classes) == 1:
        warnings.warn(f"training data has a single class {classes[0]!r}; "
                      "fitting a constant model")
        return ConstantModel(spec, classes, n_features)
    return None


# ---------------------------------------------------------------------------
# Persistence: a one-line JSON header over a pickle payload. The pickle
# round-trips numpy arrays bit-exactly, the header pins format and version.

_FORMAT = "cohort-augment-model"
_VERSION = 1


def save_model(model: TrainedModel, path: str | Path) -> None:
    payload = pickle.dumps(model, protocol=4)
    header = {"format": _FORMAT, "version": _VERSION,
              "kind": model.spec.kind,
              "payload": base64.b64encode(payload).decode("ascii")}
    Path(path).write_text(json.dumps(header), encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    try:
        header = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model file {path}: {exc}")
    if header.get("format") != _FORMAT:
        raise ModelError(f"{path} is not a {_FORMAT} file")
    if header.get("version") != _VERSION:
        raise ModelError(f"unsupported model version {header.get('version')}")
    return pickle.loads(base64.b64decode(header["payload"]))
