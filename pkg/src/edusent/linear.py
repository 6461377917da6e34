"""Logistic regression baseline trained by full-batch gradient descent.

The objective is mean binary cross-entropy plus an L2 penalty (l2/2)*||w||^2
on the weights (never the bias). Weights start at zero, so an untrained
model emits probability 0.5 for every input. If a step ever increases the
objective the step is retried at half the learning rate, which keeps the
recorded loss history non-increasing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import SchemaError, ValidationError
from .features import SparseVector
from .ingest import SentimentLabel


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])


@dataclass
class LinearTrainConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs < 1 or self.l2 < 0:
            raise ValidationError(f"bad linear training config: {self}")


@dataclass
class LinearTrainResult:
    model: LinearModel
    loss_history: list  # objective before training, then after each epoch


def sigmoid(z):
    """Numerically stable logistic function, elementwise on arrays."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    if out.ndim == 0:
        return float(out)
    return out


def _softplus(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _pack(X: Sequence[SparseVector], dim: int):
    """Flatten sparse rows into CSR-style arrays for vectorized math."""
    indptr = np.zeros(len(X) + 1, dtype=np.int64)
    for i, x in enumerate(X):
        if x.pairs and x.pairs[-1][0] >= dim:
            raise ValidationError(
                f"feature index {x.pairs[-1][0]} exceeds model dimension {dim}"
            )
        indptr[i + 1] = indptr[i] + len(x.pairs)
    indices = np.empty(indptr[-1], dtype=np.int64)
    values = np.empty(indptr[-1], dtype=np.float64)
    for i, x in enumerate(X):
        for j, (idx, w) in enumerate(x.pairs):
            indices[indptr[i] + j] = idx
            values[indptr[i] + j] = w
    rows = np.repeat(np.arange(len(X)), np.diff(indptr))
    return indices, values, rows


def lr_objective(
    X: Sequence[SparseVector],
    y: Sequence[SentimentLabel],
    w: np.ndarray,
    b: float,
    l2: float,
) -> float:
    """Mean BCE + (l2/2)*||w||^2 at (w, b), computed from logits stably."""
    indices, values, rows = _pack(X, w.shape[0])
    yv = np.array([float(int(lab)) for lab in y])
    z = np.zeros(len(X))
    np.add.at(z, rows, values * w[indices])
    z += b
    return float(np.mean(_softplus(z) - yv * z)) + 0.5 * l2 * float(w @ w)


def lr_gradient(
    X: Sequence[SparseVector],
    y: Sequence[SentimentLabel],
    w: np.ndarray,
    b: float,
    l2: float,
) -> tuple[np.ndarray, float]:
    """Exact gradient of lr_objective: mean (sigma(z) - y) x + l2 w, and the
    bias part mean (sigma(z) - y)."""
    indices, values, rows = _pack(X, w.shape[0])
    yv = np.array([float(int(lab)) for lab in y])
    z = np.zeros(len(X))
    np.add.at(z, rows, values * w[indices])
    resid = (sigmoid(z + b) - yv) / len(X)
    gw = np.zeros(w.shape[0])
    np.add.at(gw, indices, values * resid[rows])
    gw += l2 * w
    return gw, float(np.sum(resid))


def train_lr(
    X: Sequence[SparseVector],
    y: Sequence[SentimentLabel],
    cfg: LinearTrainConfig,
    dim: Optional[int] = None,
    initial: Optional[LinearModel] = None,
) -> LinearTrainResult:
    """Fit the baseline on sparse TF-IDF rows.

    `dim` is the frozen vocabulary size; when omitted it is inferred from
    the largest feature index present. `initial` warm-starts from an
    existing model instead of the zero init.
    """
    if not X or len(X) != len(y):
        raise ValidationError("X and y must be non-empty and equal-length")
    labels = {int(lab) for lab in y}
    if labels != {0, 1}:
        raise ValidationError("training requires both classes present")
    if dim is None:
        dim = 1 + max((x.pairs[-1][0] for x in X if x.pairs), default=-1)
        if initial is not None:
            dim = max(dim, initial.dim)
    if dim < 1:
        raise ValidationError("cannot infer a positive feature dimension")
    if initial is not None and initial.dim != dim:
        raise ValidationError(
            f"initial model dimension {initial.dim} does not match {dim}")

    indices, values, rows = _pack(X, dim)
    n = len(X)
    yv = np.array([float(int(lab)) for lab in y])

    def logits(w, b):
        z = np.zeros(n)
        np.add.at(z, rows, values * w[indices])
        return z + b

    def objective(w, b):
        z = logits(w, b)
        bce = float(np.mean(_softplus(z) - yv * z))
        return bce + 0.5 * cfg.l2 * float(w @ w)

    def gradient(w, b):
        resid = (sigmoid(logits(w, b)) - yv) / n
        gw = np.zeros(dim)
        np.add.at(gw, indices, values * resid[rows])
        gw += cfg.l2 * w
        return gw, float(np.sum(resid))

    if initial is not None:
        w = initial.weights.copy()
        b = float(initial.bias)
    else:
        w = np.zeros(dim)
        b = 0.0
    lr = cfg.learning_rate
    loss = objective(w, b)
    history = [loss]
    for _ in range(cfg.epochs):
        gw, gb = gradient(w, b)
        for _attempt in range(64):
            w_new = w - lr * gw
            b_new = b - lr * gb
            new_loss = objective(w_new, b_new)
            if new_loss <= loss + 1e-9:
                break
            lr *= 0.5
        w, b, loss = w_new, b_new, new_loss
        history.append(loss)
    return LinearTrainResult(model=LinearModel(weights=w, bias=b), loss_history=history)


def predict_proba(model: LinearModel, x: SparseVector) -> float:
    """sigma(w . x + b); an empty sparse vector scores sigma(b)."""
    z = model.bias
    for idx, value in x.pairs:
        if idx >= model.dim or idx < 0:
            raise ValidationError(f"feature index {idx} outside model dimension {model.dim}")
        z += model.weights[idx] * value
    return float(sigmoid(z))


def classify(p: float, threshold: float = 0.5) -> SentimentLabel:
    """Probability >= threshold reads as Positive (ties resolve Positive)."""
    if not (0.0 <= p <= 1.0):
        raise ValidationError(f"probability {p} outside [0, 1]")
    return SentimentLabel.POSITIVE if p >= threshold else SentimentLabel.NEGATIVE


def save_linear_model(model: LinearModel, path: Union[str, Path], vocab_ref: str) -> None:
    payload = {
        "version": 1,
        "kind": "logreg",
        "weights": model.weights.tolist(),
        "bias": model.bias,
        "vocab_ref": vocab_ref,
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_linear_model(path: Union[str, Path]) -> tuple[LinearModel, str]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read model file {path}: {exc}") from exc
    if payload.get("kind") != "logreg" or payload.get("version") != 1:
        raise SchemaError(f"{path} is not a version-1 logreg model file")
    model = LinearModel(
        weights=np.array(payload["weights"], dtype=np.float64),
        bias=float(payload["bias"]),
    )
    return model, str(payload.get("vocab_ref", ""))
