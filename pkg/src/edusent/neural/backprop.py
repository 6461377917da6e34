"""Reverse-mode gradients for the BiLSTM-attention classifier.

Everything is differentiated by hand against the cached forward values:
output head, attention softmax, both LSTM directions (backpropagation
through time with mask-gated state carries), and the embedding lookup.
The padding embedding row always receives an exactly-zero gradient.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import ValidationError
from .model import DirectionCache, ForwardCache, LstmCellParams, RnnModel


def weighted_bce(probs, labels, w_pos: float, w_neg: float) -> float:
    """Mean class-weighted binary cross-entropy."""
    p = np.clip(probs, 1e-12, 1.0 - 1e-12)
    y = np.asarray(labels, dtype=np.float64)
    w = np.where(y == 1.0, w_pos, w_neg)
    return float(-np.mean(w * (y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def _direction_backward(
    cell: LstmCellParams,
    cache: DirectionCache,
    dH_dir: np.ndarray,
    grads: dict,
    prefix: str,
) -> np.ndarray:
    """BPTT for one direction; returns gradient w.r.t. its input sequence."""
    B, L, E = cache.x.shape
    h_dim = cache.i.shape[2]
    dx = np.zeros((B, L, E))
    dh_carry = np.zeros((B, h_dim))
    dc_carry = np.zeros((B, h_dim))
    W = {gate: getattr(cell, f"W_{gate}").data for gate in "ifog"}
    U = {gate: getattr(cell, f"U_{gate}").data for gate in "ifog"}
    dW = {gate: grads[f"{prefix}.W_{gate}"] for gate in "ifog"}
    dU = {gate: grads[f"{prefix}.U_{gate}"] for gate in "ifog"}
    db = {gate: grads[f"{prefix}.b_{gate}"] for gate in "ifog"}

    for s in range(L - 1, -1, -1):
        m = cache.mask[:, s : s + 1]
        h_prev = cache.h_state[:, s - 1] if s > 0 else np.zeros((B, h_dim))
        c_prev = cache.c_state[:, s - 1] if s > 0 else np.zeros((B, h_dim))

        # the stored output row is m * h_tilde; the carried state is
        # m * h_tilde + (1 - m) * h_prev (same for c)
        dh_tilde = m * (dH_dir[:, s] + dh_carry)
        dc_tilde = m * dc_carry
        dh_pass = (1.0 - m) * dh_carry
        dc_pass = (1.0 - m) * dc_carry

        o = cache.o[:, s]
        tanh_c = np.tanh(cache.c_tilde[:, s])
        do = dh_tilde * tanh_c
        dc_tilde = dc_tilde + dh_tilde * o * (1.0 - tanh_c ** 2)

        i, f, g = cache.i[:, s], cache.f[:, s], cache.g[:, s]
        di = dc_tilde * g
        df = dc_tilde * c_prev
        dg = dc_tilde * i
        dc_chain = dc_tilde * f

        da = {
            "i": di * i * (1.0 - i),
            "f": df * f * (1.0 - f),
            "o": do * o * (1.0 - o),
            "g": dg * (1.0 - g ** 2),
        }
        x_s = cache.x[:, s]
        dh_gates = np.zeros((B, h_dim))
        for gate in "ifog":
            dW[gate] += da[gate].T @ x_s
            dU[gate] += da[gate].T @ h_prev
            db[gate] += da[gate].sum(axis=0)
            dx[:, s] += da[gate] @ W[gate]
            dh_gates += da[gate] @ U[gate]

        dh_carry = dh_pass + dh_gates
        dc_carry = dc_pass + dc_chain
    return dx


def backward(
    model: RnnModel,
    cache: Optional[ForwardCache],
    w_pos: float = 1.0,
    w_neg: float = 1.0,
) -> dict:
    """Exact gradients of the weighted-BCE loss for every parameter tensor.

    Fills each Tensor's grad slot and returns {name: gradient array}.
    """
    if cache is None:
        raise ValidationError("backward needs the cache from a forward pass")
    batch = cache.batch
    B = batch.ids.shape[0]
    y = batch.labels
    w = np.where(y == 1.0, w_pos, w_neg)

    grads = {name: np.zeros_like(t.data) for name, t in model.named_parameters()}

    # output head: d loss / d logit
    dlogit = w * (cache.probs - y) / B
    grads["out.w"] += cache.context.T @ dlogit
    grads["out.b"] += dlogit.sum()
    dcontext = dlogit[:, None] * model.out_w.data[None, :]

    # attention: context = sum_t alpha_t H_t with alpha = softmax(v . tanh(W H))
    alphas, u, H = cache.alphas, cache.u, cache.H
    dalpha = np.einsum("bh,blh->bl", dcontext, H)
    dH = alphas[:, :, None] * dcontext[:, None, :]
    de = alphas * (dalpha - np.sum(alphas * dalpha, axis=1, keepdims=True))
    grads["attn.v_a"] += np.einsum("bl,bla->a", de, u)
    du = de[:, :, None] * model.attention.v_a.data[None, None, :]
    dpre = du * (1.0 - u ** 2)
    grads["attn.W_a"] += np.einsum("bla,blh->ah", dpre, H)
    dH += np.einsum("bla,ah->blh", dpre, model.attention.W_a.data)

    # split the concatenated states and run BPTT per direction
    h_dim = model.dims.hidden
    dx_fwd = _direction_backward(model.forward_cell, cache.fwd,
                                 dH[:, :, :h_dim], grads, "fwd")
    dx_bwd = _direction_backward(model.backward_cell, cache.bwd,
                                 dH[:, ::-1, h_dim:], grads, "bwd")
    dx = dx_fwd + dx_bwd[:, ::-1]

    demb = grads["embedding"]
    np.add.at(demb, batch.ids.ravel(), dx.reshape(-1, dx.shape[2]))
    demb[0] = 0.0  # padding row is pinned

    for name, tensor in model.named_parameters():
        tensor.grad = grads[name]
    return grads
