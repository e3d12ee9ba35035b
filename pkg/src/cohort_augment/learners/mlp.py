"""Feed-forward tanh network with inverted dropout, softmax cross-entropy,
and Adam updates. Training is a pure function of (X, y, spec): weight init,
batch order, and dropout masks all come from one seeded generator."""

from __future__ import annotations

import numpy as np

from .base import (MLP, ModelError, ModelSpec, TrainedModel,
                   constant_model_if_single_class)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
_PROB_FLOOR = 1e-12


class TrainingDivergedError(RuntimeError):
    pass


def init_parameters(rng: np.random.Generator, layer_sizes: list[int]
                    ) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Glorot-uniform weights and zero biases for consecutive layer sizes."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_gradients(weights: list[np.ndarray], biases: list[np.ndarray],
                       X: np.ndarray, onehot: np.ndarray,
                       dropout_masks: list[np.ndarray] | None = None):
    """Mean cross-entropy and its gradients for one batch.

    ``dropout_masks`` holds one inverted-dropout mask per hidden layer
    (None disables dropout, as at prediction time and in gradient checks).
    """
    n_layers = len(weights)
    layer_inputs = [X]          # what each layer consumes (post-mask)
    tanh_outputs = []           # hidden activations before masking
    h = X
    for layer in range(n_layers - 1):
        a = np.tanh(h @ weights[layer] + biases[layer])
        tanh_outputs.append(a)
        h = a if dropout_masks is None else a * dropout_masks[layer]
        layer_inputs.append(h)
    logits = h @ weights[-1] + biases[-1]
    probs = _softmax(logits)
    n = X.shape[0]
    loss = float(-np.log(np.clip(probs[onehot.astype(bool)], _PROB_FLOOR, None)).mean())

    grad_w = [None] * n_layers
    grad_b = [None] * n_layers
    delta = (probs - onehot) / n
    grad_w[-1] = layer_inputs[-1].T @ delta
    grad_b[-1] = delta.sum(axis=0)
    for layer in range(n_layers - 2, -1, -1):
        delta = delta @ weights[layer + 1].T
        if dropout_masks is not None:
            delta = delta * dropout_masks[layer]
        delta = delta * (1.0 - tanh_outputs[layer] ** 2)
        grad_w[layer] = layer_inputs[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
    return loss, grad_w, grad_b


class MlpModel(TrainedModel):
    def __init__(self, spec, classes, n_features, weights, biases, loss_history):
        super().__init__(spec, classes, n_features)
        self.weights = weights
        self.biases = biases
        self.loss_history = loss_history

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        X = self._check_input(X)
        h = X
        for layer in range(len(self.weights) - 1):
            h = np.tanh(h @ self.weights[layer] + self.biases[layer])
        return _softmax(h @ self.weights[-1] + self.biases[-1])


def train_mlp(X: np.ndarray, y: np.ndarray, spec: ModelSpec) -> TrainedModel:
    if spec.kind != MLP:
        raise ModelError(f"spec kind {spec.kind!r} is not {MLP!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes = np.unique(y)
    constant = constant_model_if_single_class(spec, classes, X.shape[1])
    if constant is not None:
        return constant

    n, d = X.shape
    k = len(classes)
    y_idx = np.searchsorted(classes, y)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y_idx] = 1.0

    n_hidden = int(spec["layers"])
    units = int(spec["units"])
    dropout = float(spec["dropout"])
    epochs = int(spec["epochs"])
    batch_size = int(spec["batch_size"])
    lr = float(spec["learning_rate"])

    rng = np.random.default_rng(np.random.SeedSequence([spec.seed]))
    layer_sizes = [d] + [units] * n_hidden + [k]
    weights, biases = init_parameters(rng, layer_sizes)

    m_w = [np.zeros_like(w) for w in weights]
    v_w = [np.zeros_like(w) for w in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]
    step = 0
    loss_history: list[float] = []
    for epoch in range(epochs):
        perm = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, batch_size):
            batch = perm[start:start + batch_size]
            if dropout > 0.0:
                masks = [(rng.random((len(batch), units)) >= dropout) / (1.0 - dropout)
                         for _ in range(n_hidden)]
            else:
                masks = None
            loss, grad_w, grad_b = loss_and_gradients(
                weights, biases, X[batch], onehot[batch], masks)
            batch_losses.append(loss)
            step += 1
            correction1 = 1.0 - ADAM_BETA1 ** step
            correction2 = 1.0 - ADAM_BETA2 ** step
            for layer in range(len(weights)):
                for params, grads, m, v in (
                        (weights, grad_w, m_w, v_w), (biases, grad_b, m_b, v_b)):
                    g = grads[layer]
                    m[layer] = ADAM_BETA1 * m[layer] + (1 - ADAM_BETA1) * g
                    v[layer] = ADAM_BETA2 * v[layer] + (1 - ADAM_BETA2) * g * g
                    m_hat = m[layer] / correction1
                    v_hat = v[layer] / correction2
                    params[layer] = params[layer] - lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
        epoch_loss = float(np.mean(batch_losses))
        loss_history.append(epoch_loss)
        if not np.isfinite(epoch_loss):
            raise TrainingDivergedError(
                f"loss became non-finite at epoch {epoch + 1}; "
                "try a lower learning rate")
    return MlpModel(spec, classes, d, weights, biases, loss_history)
