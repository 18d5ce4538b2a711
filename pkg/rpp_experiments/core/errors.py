"""Exception hierarchy for RPP Experiments.

Library code raises these; the CLI catches ``RPPError`` at the top level and
experiment fan-outs record failures per run instead of propagating them.
"""

from typing import Optional


class RPPError(Exception):
    """Base class for every error raised by the package."""


class StructuralError(RPPError, ValueError):
    """Shape or dimension mismatch, inconsistent representation chain."""


class ConfigError(RPPError, ValueError):
    """Invalid configuration value."""


class SizeLimitError(RPPError):
    """Problem exceeds the dense solver scope."""


class NumericalError(RPPError):
    """Non-convergence or non-finite values in a numerical routine."""


class EmptyLieAlgebraError(RPPError):
    """A Lie generator was used with a group that has no Lie algebra."""


class UnknownEnvironmentError(RPPError, KeyError):
    """Environment name not present in the representation catalog."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class DataFormatError(RPPError, ValueError):
    """Input data file is malformed (non-numeric cells, missing columns)."""


class OutputPermissionError(RPPError):
    """Output location cannot be written."""


class TrainingDivergedError(RPPError):
    """Training loss exceeded the divergence threshold or became non-finite."""

    def __init__(self, message: str, epoch: Optional[int] = None) -> None:
        super().__init__(message)
        self.epoch = epoch


class NonFiniteGradientError(TrainingDivergedError):
    """A parameter received a NaN or Inf gradient."""

    def __init__(
        self, parameter: str, epoch: Optional[int] = None, step: Optional[int] = None
    ) -> None:
        where = f" at step {step}" if step is not None else ""
        super().__init__(
            f"Non-finite gradient for parameter '{parameter}'{where}", epoch
        )
        self.parameter = parameter
        self.step = step
