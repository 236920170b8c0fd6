"""Minimal reverse-mode autodiff over dense tensors."""

from .gradcheck import CHECKABLE_OPS, check_scalar_fn, finite_difference, grad_check, max_rel_error
from .optim import OptimConfig, Optimizer
from .tensor import ShapeError, Tensor, backward
from . import ops

__all__ = [
    "CHECKABLE_OPS", "OptimConfig", "Optimizer", "ShapeError", "Tensor",
    "backward", "check_scalar_fn", "finite_difference", "grad_check",
    "max_rel_error", "ops",
]
