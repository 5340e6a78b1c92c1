"""Minimal reverse-mode differentiation engine."""

from salnet.autodiff.checkpoint import (
    assign_checkpoint,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from salnet.autodiff.gradcheck import GradCheckReport, grad_check
from salnet.autodiff.graph import DiffGraph, Node
from salnet.autodiff.optim import Adam, AdamState, adam_step
from salnet.autodiff.value import DiffValue

__all__ = [
    "DiffValue",
    "DiffGraph",
    "Node",
    "grad_check",
    "GradCheckReport",
    "Adam",
    "AdamState",
    "adam_step",
    "encode_checkpoint",
    "decode_checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "assign_checkpoint",
]
