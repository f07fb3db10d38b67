"""Minimal dense numerical core with reverse-mode gradients."""

from .layers import (
    adaln,
    attention_block,
    cross_entropy,
    embedding,
    layer_norm,
    linear,
    log_softmax,
    mhsa,
    silu_mlp,
    softmax,
)
from .params import ParameterStore, adam_step, checkpoint_hash
from .tensor import Tensor, concat, no_grad, parameter, stack

__all__ = [
    "ParameterStore",
    "Tensor",
    "adaln",
    "adam_step",
    "attention_block",
    "checkpoint_hash",
    "concat",
    "cross_entropy",
    "embedding",
    "layer_norm",
    "linear",
    "log_softmax",
    "mhsa",
    "no_grad",
    "parameter",
    "silu_mlp",
    "softmax",
    "stack",
]
