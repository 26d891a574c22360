"""
Exception types raised by the lambda_fcs modules.

Everything derives from LambdaFcsError so the CLI can separate numerical
failures (exit code 3) from configuration mistakes (ConfigError, exit code 2).
"""
from __future__ import annotations

from typing import Optional


class LambdaFcsError(Exception):
    """Base class for all lambda_fcs errors."""


class InvalidParams(LambdaFcsError, ValueError):
    """A SystemParams/MediumParams field is out of its allowed range."""


class InvalidState(LambdaFcsError, ValueError):
    """A 3x3 matrix is not a valid density matrix at the requested tolerance."""

    def __init__(
        self,
        message: str,
        hermiticity: float = 0.0,
        trace_error: float = 0.0,
        min_eigenvalue: float = 0.0,
    ) -> None:
        super().__init__(message)
        self.hermiticity = hermiticity
        self.trace_error = trace_error
        self.min_eigenvalue = min_eigenvalue


class DegenerateSteadyState(LambdaFcsError):
    """The generator kernel is not one-dimensional."""

    def __init__(self, message: str, rank: Optional[int] = None) -> None:
        super().__init__(message)
        self.rank = rank


class OutOfValidityRegime(LambdaFcsError, ValueError):
    """A closed-form expression was requested outside the regime it holds in."""


class StepSizeUnderflow(LambdaFcsError):
    def __init__(self, message: str, tau: float) -> None:
        super().__init__(message)
        self.tau = tau


class DegenerateZeroEigenvalue(LambdaFcsError):
    def __init__(self, message: str, a1: complex) -> None:
        super().__init__(message)
        self.a1 = a1


class NewtonNonConvergence(LambdaFcsError):
    def __init__(self, message: str, z: float, iterations: int) -> None:
        super().__init__(message)
        self.z = z
        self.iterations = iterations


class TruncationTooSmall(LambdaFcsError):
    def __init__(self, message: str, boundary_mass: float, n_max: int) -> None:
        super().__init__(message)
        self.boundary_mass = boundary_mass
        self.n_max = n_max


class LinearizationViolated(LambdaFcsError):
    def __init__(self, message: str, chi_magnitude: float) -> None:
        super().__init__(message)
        self.chi_magnitude = chi_magnitude


class VelocityOutOfRange(LambdaFcsError, ValueError):
    pass


class PreconditionViolated(LambdaFcsError, ValueError):
    pass


class ConfigError(LambdaFcsError, ValueError):
    """Bad run configuration (TOML file, --set override, preset name, sweep axis)."""
