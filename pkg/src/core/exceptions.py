#!/usr/bin/env python3
"""
Custom exceptions for the Fermi-gas tracer laboratory.

Every exception carries the process exit code the CLI returns for it.
"""

from typing import Optional


class FermiGasError(Exception):
    """Base exception for all laboratory errors."""
    exit_code = 1


class ConfigurationError(FermiGasError):
    """Invalid specification, configuration value or command-line usage."""
    exit_code = 2


class DegenerateSeaError(ConfigurationError):
    """The requested density and box hold no particle (N = 0)."""
    pass


class NumericalError(FermiGasError):
    """A quadrature, truncation or exponential iteration failed to converge."""
    exit_code = 3

    def __init__(self, message: str, achieved: Optional[float] = None):
        super().__init__(message)
        self.achieved = achieved


class FitDomainError(NumericalError):
    """Nonpositive sample passed to a logarithmic regression."""
    pass


class ResourceLimitError(FermiGasError):
    """An enumeration or basis exceeded its configured budget."""
    exit_code = 4
