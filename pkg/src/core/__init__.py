"""Core package: exceptions and result schemas."""

from .definitions import (
    SUM_RECORD_FIELDS,
    DEVIATION_RECORD_FIELDS,
    EVOLUTION_RECORD_FIELDS,
    FOURIER_TABLE_FIELDS,
    CLAIM_FIELDS,
    SCAN_QUANTITIES,
    get_fields,
)
from .exceptions import (
    FermiGasError,
    ConfigurationError,
    DegenerateSeaError,
    NumericalError,
    FitDomainError,
    ResourceLimitError,
)

__all__ = [
    'SUM_RECORD_FIELDS',
    'DEVIATION_RECORD_FIELDS',
    'EVOLUTION_RECORD_FIELDS',
    'FOURIER_TABLE_FIELDS',
    'CLAIM_FIELDS',
    'SCAN_QUANTITIES',
    'get_fields',
    'FermiGasError',
    'ConfigurationError',
    'DegenerateSeaError',
    'NumericalError',
    'FitDomainError',
    'ResourceLimitError',
]
