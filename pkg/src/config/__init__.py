"""Configuration package for the Fermi-gas tracer laboratory."""

from .settings import (
    FGT_THREADS,
    MAX_LATTICE_POINTS,
    MAX_BASIS_SIZE,
    QUADRATURE_RTOL,
    TAIL_RTOL,
    OUTPUT_DIR,
    LOG_DIR,
    LOG_FILE,
    LOG_LEVEL,
    print_config_summary,
)

__all__ = [
    'FGT_THREADS',
    'MAX_LATTICE_POINTS',
    'MAX_BASIS_SIZE',
    'QUADRATURE_RTOL',
    'TAIL_RTOL',
    'OUTPUT_DIR',
    'LOG_DIR',
    'LOG_FILE',
    'LOG_LEVEL',
    'print_config_summary',
]
