"""Tape-based reverse-mode automatic differentiation."""

from .gradcheck import finite_diff_check
from .tensor import Tape, Tensor

__all__ = ["Tape", "Tensor", "finite_diff_check"]
