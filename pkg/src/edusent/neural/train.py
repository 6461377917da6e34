"""Mini-batch Adam training for the sequence model.

Class imbalance is handled through the loss weights (synthetic
oversampling has no meaning for token sequences), batches are shuffled by
a seeded generator, and early stopping tracks validation F1. The returned
model is the best-validation snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import ValidationError
from .backprop import backward, weighted_bce
from .model import RnnDims, RnnModel, build_batch, forward, init_model, predict_sequences


@dataclass
class NeuralTrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_pos: float = 1.0
    weight_neg: float = 1.0
    seed: int = 0
    patience: int = 3  # 0 disables early stopping

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValidationError(f"bad neural training config: {self}")


@dataclass
class SequenceDataset:
    """Encoded id sequences with {0,1} labels. Training rows must be non-empty."""

    sequences: list
    labels: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if len(self.sequences) != self.labels.shape[0]:
            raise ValidationError("sequences and labels lengths differ")

    def __len__(self) -> int:
        return len(self.sequences)


@dataclass
class RnnTrainResult:
    model: RnnModel
    initial_loss: float
    epoch_losses: list = field(default_factory=list)
    val_f1s: list = field(default_factory=list)
    val_losses: list = field(default_factory=list)
    best_epoch: int = -1


class Adam:
    """Adam with bias correction over a model's named parameter tensors."""

    def __init__(self, model: RnnModel, cfg: NeuralTrainConfig):
        self.cfg = cfg
        self.params = list(model.named_parameters())
        self.m = {name: np.zeros_like(t.data) for name, t in self.params}
        self.v = {name: np.zeros_like(t.data) for name, t in self.params}
        self.t = 0

    def step(self):
        self.t += 1
        c = self.cfg
        bc1 = 1.0 - c.beta1 ** self.t
        bc2 = 1.0 - c.beta2 ** self.t
        for name, tensor in self.params:
            g = tensor.grad
            if g is None:
                raise ValidationError(f"parameter {name} has no gradient; run backward first")
            m = self.m[name]
            v = self.v[name]
            m *= c.beta1
            m += (1.0 - c.beta1) * g
            v *= c.beta2
            v += (1.0 - c.beta2) * g * g
            tensor.data -= c.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + c.eps)


def f1_score(labels: Sequence[float], probs: Sequence[float], threshold: float = 0.5) -> float:
    y = np.asarray(labels)
    pred = np.asarray(probs) >= threshold
    tp = float(np.sum(pred & (y == 1.0)))
    fp = float(np.sum(pred & (y == 0.0)))
    fn = float(np.sum(~pred & (y == 1.0)))
    if tp == 0.0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def dataset_loss(model: RnnModel, ds: SequenceDataset, cfg: NeuralTrainConfig) -> float:
    """Weighted-BCE of the whole dataset under the current parameters."""
    probs = predict_sequences(model, ds.sequences)
    return weighted_bce(probs, ds.labels, cfg.weight_pos, cfg.weight_neg)


def train_rnn(
    train: SequenceDataset,
    valid: SequenceDataset,
    cfg: NeuralTrainConfig,
    dims: RnnDims,
    initial: Optional[RnnModel] = None,
) -> RnnTrainResult:
    """Train from scratch (or resume from `initial`); fully deterministic
    for a fixed config seed."""
    if len(train) == 0:
        raise ValidationError("empty training set")
    if any(len(seq) == 0 for seq in train.sequences):
        raise ValidationError("training sequences must be non-empty; filter them upstream")
    label_set = set(np.unique(train.labels))
    if label_set != {0.0, 1.0}:
        raise ValidationError("training requires both classes present")

    if initial is not None:
        if initial.dims != dims:
            raise ValidationError(
                f"initial model dims {initial.dims} do not match requested {dims}")
        model = initial.copy()
    else:
        model = init_model(dims, cfg.seed)
    opt = Adam(model, cfg)
    shuffle_rng = np.random.default_rng([cfg.seed, 1])

    result = RnnTrainResult(model=model, initial_loss=dataset_loss(model, train, cfg))
    # best snapshot by validation F1; ties break towards lower validation loss
    best_key = (-1.0, -np.inf)
    best_model = model.copy()
    stall = 0
    n = len(train)
    for epoch in range(cfg.epochs):
        perm = shuffle_rng.permutation(n)
        total = 0.0
        for bi, start in enumerate(range(0, n, cfg.batch_size)):
            idx = perm[start : start + cfg.batch_size]
            batch = build_batch([train.sequences[j] for j in idx],
                                train.labels[idx], dims.max_len)
            cache = forward(model, batch)
            loss = weighted_bce(cache.probs, batch.labels, cfg.weight_pos, cfg.weight_neg)
            if not np.isfinite(loss):
                raise ValidationError(f"training diverged (loss not finite) at epoch {epoch}, batch {bi}")
            backward(model, cache, cfg.weight_pos, cfg.weight_neg)
            opt.step()
            model.embedding.data[0] = 0.0
            total += loss * len(idx)
        result.epoch_losses.append(total / n)

        val_probs = predict_sequences(model, valid.sequences)
        f1 = f1_score(valid.labels, val_probs)
        val_loss = weighted_bce(val_probs, valid.labels, cfg.weight_pos, cfg.weight_neg)
        result.val_f1s.append(f1)
        result.val_losses.append(val_loss)
        key = (f1, -val_loss)
        if key > best_key:
            best_key = key
            best_model = model.copy()
            result.best_epoch = epoch
            stall = 0
        else:
            stall += 1
            if cfg.patience > 0 and stall >= cfg.patience:
                break
    result.model = best_model
    return result
