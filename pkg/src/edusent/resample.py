"""Class balancing: SMOTE in dense feature space, class weights for the RNN.

SMOTE interpolates synthetic minority points between a parent and one of its
k nearest minority neighbors. The linear model trains on the balanced set;
the sequence model cannot consume synthetic vectors, so it uses weighted
cross-entropy with the weights computed here instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .ingest import SentimentLabel


@dataclass
class SmoteConfig:
    k_neighbors: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValidationError(f"k_neighbors must be >= 1, got {self.k_neighbors}")


@dataclass
class SyntheticSample:
    vector: np.ndarray
    parent_index: int
    neighbor_index: int
    lam: float


def _neighbor_table(minority: np.ndarray, k: int, chunk: int = 512) -> np.ndarray:
    """Indices of each row's k nearest Euclidean neighbors, excluding itself.

    Distance ties break on the smaller row index so the table is stable.
    Works in row chunks to keep the distance matrix memory bounded.
    """
    n = minority.shape[0]
    sq = np.sum(minority * minority, axis=1)
    table = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, chunk):
        rows = minority[start:start + chunk]
        d2 = sq[start:start + chunk, None] + sq[None, :] - 2.0 * (rows @ minority.T)
        np.maximum(d2, 0.0, out=d2)
        for i in range(d2.shape[0]):
            d2[i, start + i] = np.inf
        tie = np.broadcast_to(np.arange(n), d2.shape)
        order = np.lexsort((tie, d2), axis=1)
        table[start:start + chunk] = order[:, :k]
    return table


def smote(
    minority: Sequence[np.ndarray],
    n_new: int,
    cfg: SmoteConfig,
) -> list[SyntheticSample]:
    """Generate n_new synthetic minority samples, deterministically.

    Parents cycle round-robin through the minority set; the neighbor is drawn
    uniformly among the parent's min(k_neighbors, n-1) nearest neighbors and
    the interpolation factor is Uniform[0, 1] from the seeded generator.
    """
    X = np.asarray(minority, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValidationError("SMOTE requires >= 2 minority samples")
    n = X.shape[0]
    k = min(cfg.k_neighbors, n - 1)
    neighbors = _neighbor_table(X, k)
    rng = np.random.default_rng(cfg.seed)
    out: list[SyntheticSample] = []
    for j in range(n_new):
        parent = j % n
        neighbor = int(neighbors[parent, rng.integers(0, k)])
        lam = float(rng.uniform(0.0, 1.0))
        vec = X[parent] + lam * (X[neighbor] - X[parent])
        out.append(SyntheticSample(vector=vec, parent_index=parent,
                                   neighbor_index=neighbor, lam=lam))
    return out


def balance_to_parity(
    X: Sequence[np.ndarray],
    y: Sequence[SentimentLabel],
    cfg: SmoteConfig,
) -> tuple[list[np.ndarray], list[SentimentLabel]]:
    """Oversample the minority class until both class counts are equal.

    Originals are preserved verbatim and come first, in their input order;
    synthetic minority samples are appended. Inputs already balanced pass
    through unchanged.
    """
    X = list(X)
    y = list(y)
    n_pos = sum(1 for lab in y if lab == SentimentLabel.POSITIVE)
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("balance_to_parity needs both classes present")
    if n_pos == n_neg:
        return X, y
    minority_label = SentimentLabel.NEGATIVE if n_neg < n_pos else SentimentLabel.POSITIVE
    minority = [np.asarray(v, dtype=np.float64) for v, lab in zip(X, y)
                if lab == minority_label]
    n_new = abs(n_pos - n_neg)
    synth = smote(minority, n_new, cfg)
    X_out = [np.asarray(v, dtype=np.float64) for v in X] + [s.vector for s in synth]
    y_out = y + [minority_label] * n_new
    return X_out, y_out


def class_weights(y: Sequence[SentimentLabel]) -> tuple[float, float]:
    """(w_pos, w_neg) with w_c = N / (2 * count_c); balanced data gives (1, 1)."""
    n_pos = sum(1 for lab in y if lab == SentimentLabel.POSITIVE)
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("class_weights needs both classes present")
    n = len(y)
    return n / (2.0 * n_pos), n / (2.0 * n_neg)
