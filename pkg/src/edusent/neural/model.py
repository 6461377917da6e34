"""Bidirectional LSTM with additive attention, built directly on numpy.

Forward passes cache every intermediate needed by the hand-written
backward pass in `backprop`. All math is float64 and deterministic.

Architecture: trainable embedding (row 0 pinned to zeros for padding),
one LSTM per direction, additive (tanh) attention over the concatenated
hidden states, and a sigmoid output head that is zero-initialized so an
untrained model emits exactly 0.5.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from ..errors import SchemaError, ValidationError

GATES = ("i", "f", "o", "g")


class Tensor:
    """A dense parameter array with an attached gradient slot."""

    __slots__ = ("data", "grad")

    def __init__(self, data):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None

    @property
    def shape(self):
        return self.data.shape

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def copy(self) -> "Tensor":
        return Tensor(self.data.copy())


@dataclass
class RnnDims:
    vocab_size: int  # number of real terms; embedding has vocab_size + 1 rows
    embed_dim: int = 64
    hidden: int = 64
    attn_dim: int = 64
    max_len: int = 128

    def as_dict(self) -> dict:
        return {
            "vocab_size": self.vocab_size,
            "embed_dim": self.embed_dim,
            "hidden": self.hidden,
            "attn_dim": self.attn_dim,
            "max_len": self.max_len,
        }


@dataclass
class LstmCellParams:
    """Per-gate input weights W_* (hidden x embed), recurrent weights U_*
    (hidden x hidden), and biases b_* (hidden,)."""

    W_i: Tensor
    U_i: Tensor
    b_i: Tensor
    W_f: Tensor
    U_f: Tensor
    b_f: Tensor
    W_o: Tensor
    U_o: Tensor
    b_o: Tensor
    W_g: Tensor
    U_g: Tensor
    b_g: Tensor

    def named_tensors(self, prefix: str):
        for gate in GATES:
            yield f"{prefix}.W_{gate}", getattr(self, f"W_{gate}")
            yield f"{prefix}.U_{gate}", getattr(self, f"U_{gate}")
            yield f"{prefix}.b_{gate}", getattr(self, f"b_{gate}")


@dataclass
class AttentionParams:
    W_a: Tensor  # (attn_dim, 2 * hidden)
    v_a: Tensor  # (attn_dim,)


@dataclass
class RnnModel:
    dims: RnnDims
    embedding: Tensor  # (vocab_size + 1, embed_dim); row 0 stays zero
    forward_cell: LstmCellParams
    backward_cell: LstmCellParams
    attention: AttentionParams
    out_w: Tensor  # (2 * hidden,)
    out_b: Tensor  # scalar, shape ()

    def named_parameters(self):
        """Fixed-order (name, Tensor) pairs covering every trainable array."""
        yield "embedding", self.embedding
        yield from self.forward_cell.named_tensors("fwd")
        yield from self.backward_cell.named_tensors("bwd")
        yield "attn.W_a", self.attention.W_a
        yield "attn.v_a", self.attention.v_a
        yield "out.w", self.out_w
        yield "out.b", self.out_b

    def copy(self) -> "RnnModel":
        clone = load_state({name: t.data for name, t in self.named_parameters()},
                           self.dims)
        return clone


@dataclass
class TokenBatch:
    """Padded id matrix with its mask and labels.

    ids uses 0 for padding; mask is 1.0 exactly where ids != 0, and every
    row must contain at least one real token.
    """

    ids: np.ndarray  # (batch, max_len) int64
    mask: np.ndarray  # (batch, max_len) float64 in {0, 1}
    labels: np.ndarray  # (batch,) float64 in {0, 1}

    def __post_init__(self):
        if self.ids.shape != self.mask.shape or self.ids.shape[0] != self.labels.shape[0]:
            raise ValidationError("TokenBatch shapes are inconsistent")
        if np.any((self.ids == 0) != (self.mask == 0.0)):
            raise ValidationError("mask must be 0 exactly at padding ids")
        if np.any(self.mask.sum(axis=1) < 1):
            raise ValidationError("every batch row needs at least one unmasked token")


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _init_cell(rng: np.random.Generator, dims: RnnDims) -> LstmCellParams:
    h, e = dims.hidden, dims.embed_dim
    kwargs = {}
    for gate in GATES:
        kwargs[f"W_{gate}"] = Tensor(_glorot(rng, e, h, (h, e)))
        kwargs[f"U_{gate}"] = Tensor(_glorot(rng, h, h, (h, h)))
        # forget-gate bias 1.0 keeps early cell memory alive
        kwargs[f"b_{gate}"] = Tensor(np.full(h, 1.0) if gate == "f" else np.zeros(h))
    return LstmCellParams(**kwargs)


def init_model(dims: RnnDims, seed: int) -> RnnModel:
    rng = np.random.default_rng(seed)
    emb = _glorot(rng, dims.vocab_size + 1, dims.embed_dim,
                  (dims.vocab_size + 1, dims.embed_dim))
    emb[0] = 0.0
    fwd = _init_cell(rng, dims)
    bwd = _init_cell(rng, dims)
    attn = AttentionParams(
        W_a=Tensor(_glorot(rng, 2 * dims.hidden, dims.attn_dim,
                           (dims.attn_dim, 2 * dims.hidden))),
        v_a=Tensor(_glorot(rng, dims.attn_dim, 1, (dims.attn_dim,))),
    )
    return RnnModel(
        dims=dims,
        embedding=Tensor(emb),
        forward_cell=fwd,
        backward_cell=bwd,
        attention=attn,
        out_w=Tensor(np.zeros(2 * dims.hidden)),
        out_b=Tensor(np.zeros(())),
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def embed(model: RnnModel, batch: TokenBatch) -> np.ndarray:
    """Row lookup, (batch, max_len, embed_dim); pads hit the pinned zero row."""
    n_rows = model.embedding.data.shape[0]
    if np.any(batch.ids < 0) or np.any(batch.ids >= n_rows):
        raise ValidationError(f"token id outside embedding table of {n_rows} rows")
    return model.embedding.data[batch.ids]


def lstm_step(
    x_t: np.ndarray,
    h_prev: np.ndarray,
    c_prev: np.ndarray,
    cell: LstmCellParams,
) -> tuple[np.ndarray, np.ndarray]:
    """One LSTM update. Accepts (batch, dim) or bare (dim,) arrays."""
    gates = _gate_values(x_t, h_prev, cell)
    i, f, o, g = gates
    c_t = f * c_prev + i * g
    h_t = o * np.tanh(c_t)
    return h_t, c_t


def _gate_values(x_t, h_prev, cell):
    try:
        a_i = x_t @ cell.W_i.data.T + h_prev @ cell.U_i.data.T + cell.b_i.data
        a_f = x_t @ cell.W_f.data.T + h_prev @ cell.U_f.data.T + cell.b_f.data
        a_o = x_t @ cell.W_o.data.T + h_prev @ cell.U_o.data.T + cell.b_o.data
        a_g = x_t @ cell.W_g.data.T + h_prev @ cell.U_g.data.T + cell.b_g.data
    except ValueError as exc:
        raise ValidationError(f"lstm_step shape mismatch: {exc}") from exc
    return _sigmoid(a_i), _sigmoid(a_f), _sigmoid(a_o), np.tanh(a_g)


@dataclass
class DirectionCache:
    """Per-timestep values of one direction, in processing order."""

    x: np.ndarray  # (B, L, E) inputs as consumed (reversed for the backward cell)
    mask: np.ndarray  # (B, L)
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    c_tilde: np.ndarray  # candidate cell value before mask gating
    h_tilde: np.ndarray  # o * tanh(c_tilde)
    h_state: np.ndarray  # carried hidden state after mask gating
    c_state: np.ndarray


@dataclass
class ForwardCache:
    batch: TokenBatch
    embedded: np.ndarray
    fwd: DirectionCache
    bwd: DirectionCache
    H: np.ndarray  # (B, L, 2 * hidden), zero rows at masked positions
    u: np.ndarray  # tanh(W_a . h), (B, L, attn_dim)
    alphas: np.ndarray  # (B, L)
    context: np.ndarray  # (B, 2 * hidden)
    logits: np.ndarray  # (B,)
    probs: np.ndarray  # (B,)


def _run_direction(cell: LstmCellParams, x: np.ndarray, mask: np.ndarray) -> DirectionCache:
    """Run one direction over already time-ordered inputs.

    Masked steps compute gates but pass the carried (h, c) state through
    unchanged and contribute zero rows to the output, so a padded tail never
    alters real positions.
    """
    B, L, _ = x.shape
    h_dim = cell.b_i.data.shape[0]
    i_all = np.empty((B, L, h_dim))
    f_all = np.empty((B, L, h_dim))
    o_all = np.empty((B, L, h_dim))
    g_all = np.empty((B, L, h_dim))
    ct_all = np.empty((B, L, h_dim))
    ht_all = np.empty((B, L, h_dim))
    hs_all = np.empty((B, L, h_dim))
    cs_all = np.empty((B, L, h_dim))
    h = np.zeros((B, h_dim))
    c = np.zeros((B, h_dim))
    for s in range(L):
        m = mask[:, s : s + 1]
        i, f, o, g = _gate_values(x[:, s], h, cell)
        c_tilde = f * c + i * g
        h_tilde = o * np.tanh(c_tilde)
        h = m * h_tilde + (1.0 - m) * h
        c = m * c_tilde + (1.0 - m) * c
        i_all[:, s], f_all[:, s], o_all[:, s], g_all[:, s] = i, f, o, g
        ct_all[:, s], ht_all[:, s] = c_tilde, h_tilde
        hs_all[:, s], cs_all[:, s] = h, c
    return DirectionCache(x=x, mask=mask, i=i_all, f=f_all, o=o_all, g=g_all,
                          c_tilde=ct_all, h_tilde=ht_all, h_state=hs_all, c_state=cs_all)


def bilstm(model: RnnModel, embedded: np.ndarray, mask: np.ndarray):
    """Concatenated per-position hidden states, (B, L, 2 * hidden).

    Returns (H, fwd_cache, bwd_cache); masked positions are zero rows.
    """
    fwd = _run_direction(model.forward_cell, embedded, mask)
    bwd = _run_direction(model.backward_cell, embedded[:, ::-1], mask[:, ::-1])
    h_f = fwd.mask[:, :, None] * fwd.h_tilde
    h_b = (bwd.mask[:, :, None] * bwd.h_tilde)[:, ::-1]
    return np.concatenate([h_f, h_b], axis=2), fwd, bwd


def attention(model: RnnModel, H: np.ndarray, mask: np.ndarray):
    """Additive attention pooling.

    Returns (context (B, 2h), alphas (B, L), u) where alphas are a softmax
    over unmasked positions only.
    """
    if np.any(mask.sum(axis=1) < 1):
        raise ValidationError("attention needs at least one unmasked position per row")
    u = np.tanh(H @ model.attention.W_a.data.T)  # (B, L, A)
    e = u @ model.attention.v_a.data  # (B, L)
    e_masked = np.where(mask > 0, e, -np.inf)
    e_shift = e_masked - e_masked.max(axis=1, keepdims=True)
    exps = np.where(mask > 0, np.exp(e_shift), 0.0)
    alphas = exps / exps.sum(axis=1, keepdims=True)
    context = np.einsum("bl,blh->bh", alphas, H)
    return context, alphas, u


def forward(model: RnnModel, batch: TokenBatch) -> ForwardCache:
    """Full forward pass; the returned cache feeds `backprop.backward`."""
    embedded = embed(model, batch)
    H, fwd, bwd = bilstm(model, embedded, batch.mask)
    context, alphas, u = attention(model, H, batch.mask)
    logits = context @ model.out_w.data + model.out_b.data
    probs = _sigmoid(logits)
    return ForwardCache(batch=batch, embedded=embedded, fwd=fwd, bwd=bwd, H=H,
                        u=u, alphas=alphas, context=context, logits=logits, probs=probs)


def predict_sequences(
    model: RnnModel,
    sequences: Sequence[Sequence[int]],
    chunk: int = 256,
) -> np.ndarray:
    """Probabilities for raw id sequences, evaluated in fixed-size chunks.

    Empty sequences cannot enter a TokenBatch; they fall back to the
    bias-only path sigma(out_b), i.e. the model's prior.
    """
    probs = np.empty(len(sequences))
    nonempty = [(row, list(seq)) for row, seq in enumerate(sequences) if len(seq) > 0]
    bias_p = float(_sigmoid(model.out_b.data.reshape(1))[0])
    probs[:] = bias_p
    for start in range(0, len(nonempty), chunk):
        part = nonempty[start : start + chunk]
        batch = build_batch([seq for _, seq in part],
                            np.zeros(len(part)), model.dims.max_len)
        out = forward(model, batch).probs
        for (row, _), p in zip(part, out):
            probs[row] = p
    return probs


def build_batch(
    sequences: Sequence[Sequence[int]],
    labels: Sequence[float],
    max_len: int,
) -> TokenBatch:
    """Pad id sequences to the longest row (capped at max_len) and mask them."""
    if len(sequences) == 0:
        raise ValidationError("cannot build an empty batch")
    clipped = [list(seq[:max_len]) for seq in sequences]
    if any(len(seq) == 0 for seq in clipped):
        raise ValidationError("batch rows must contain at least one token id")
    width = max(len(seq) for seq in clipped)
    ids = np.zeros((len(clipped), width), dtype=np.int64)
    for r, seq in enumerate(clipped):
        ids[r, : len(seq)] = seq
    mask = (ids != 0).astype(np.float64)
    return TokenBatch(ids=ids, mask=mask, labels=np.asarray(labels, dtype=np.float64))


def encode_tokens(tokens: Sequence[str], term_to_index: dict, max_len: int) -> list:
    """Map tokens to 1-based ids (0 is padding); out-of-vocabulary drops out."""
    ids = [term_to_index[t] + 1 for t in tokens if t in term_to_index]
    return ids[:max_len]


def save_rnn_model(model: RnnModel, path: Union[str, Path], vocab_ref: str) -> None:
    tensors = {
        name: [list(t.data.shape), t.data.ravel().tolist()]
        for name, t in model.named_parameters()
    }
    payload = {
        "version": 1,
        "kind": "rnn",
        "dims": model.dims.as_dict(),
        "tensors": tensors,
        "vocab_ref": vocab_ref,
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_state(arrays: dict, dims: RnnDims) -> RnnModel:
    """Assemble a model from a {parameter name: array} mapping."""
    blank = init_model(dims, seed=0)
    for name, tensor in blank.named_parameters():
        if name not in arrays:
            raise SchemaError(f"model state lacks tensor {name!r}")
        data = np.asarray(arrays[name], dtype=np.float64).reshape(tensor.data.shape)
        tensor.data = data.copy()
    return blank


def load_rnn_model(path: Union[str, Path]) -> tuple[RnnModel, str]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read model file {path}: {exc}") from exc
    if payload.get("kind") != "rnn" or payload.get("version") != 1:
        raise SchemaError(f"{path} is not a version-1 rnn model file")
    dims = RnnDims(**payload["dims"])
    arrays = {
        name: np.array(flat, dtype=np.float64).reshape(shape)
        for name, (shape, flat) in payload["tensors"].items()
    }
    return load_state(arrays, dims), str(payload.get("vocab_ref", ""))
