"""Minimal deterministic differentiable-computation substrate."""

from .gradcheck import GradCheckReport, grad_check
from .ops import (
    conv2d,
    dense,
    exp,
    gather_rows,
    log,
    mask_a,
    mask_b,
    relu,
    sigmoid,
    softmax,
    softmax_cross_entropy,
    square,
    tanh,
    upsample2x,
)
from .optim import ParamStore, adam_step
from .serialize import load_model, save_model
from .tensor import Tensor, set_finite_checks

__all__ = [
    "GradCheckReport",
    "ParamStore",
    "Tensor",
    "adam_step",
    "conv2d",
    "dense",
    "exp",
    "gather_rows",
    "grad_check",
    "load_model",
    "log",
    "mask_a",
    "mask_b",
    "relu",
    "save_model",
    "set_finite_checks",
    "sigmoid",
    "softmax",
    "softmax_cross_entropy",
    "square",
    "tanh",
    "upsample2x",
]
