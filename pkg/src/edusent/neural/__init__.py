"""Bidirectional LSTM + attention classifier with hand-written gradients."""

from .backprop import backward, weighted_bce
from .model import (
    AttentionParams,
    DirectionCache,
    ForwardCache,
    LstmCellParams,
    RnnDims,
    RnnModel,
    Tensor,
    TokenBatch,
    attention,
    bilstm,
    build_batch,
    embed,
    encode_tokens,
    forward,
    init_model,
    load_rnn_model,
    lstm_step,
    predict_sequences,
    save_rnn_model,
)
from .train import (
    Adam,
    NeuralTrainConfig,
    RnnTrainResult,
    SequenceDataset,
    dataset_loss,
    f1_score,
    train_rnn,
)

__all__ = [
    "Adam",
    "AttentionParams",
    "DirectionCache",
    "ForwardCache",
    "LstmCellParams",
    "NeuralTrainConfig",
    "RnnDims",
    "RnnModel",
    "RnnTrainResult",
    "SequenceDataset",
    "Tensor",
    "TokenBatch",
    "attention",
    "backward",
    "bilstm",
    "build_batch",
    "dataset_loss",
    "embed",
    "encode_tokens",
    "f1_score",
    "forward",
    "init_model",
    "load_rnn_model",
    "lstm_step",
    "predict_sequences",
    "save_rnn_model",
    "train_rnn",
    "weighted_bce",
]
