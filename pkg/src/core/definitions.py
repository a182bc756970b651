#!/usr/bin/env python3
"""
Result Schema Definitions
Immutable column lists for every CSV the laboratory writes.
This keeps writers, readers and the report command in agreement.
"""

from typing import Dict, Final, List

# ============================================================================
# SUM RECORDS (sums, scaling)
# ============================================================================

SUM_RECORD_FIELDS: Final[List[str]] = [
    'mode',        # 'lattice' or 'continuum'
    'd',           # Spatial dimension
    'rho',         # Requested density
    'L',           # Box side (empty in continuum mode)
    'eps',         # Transfer cut exponent
    'M',           # Number of shells
    'q',           # Power of |F[v]|
    'quantity',    # Quantity name (e.g. 'fluctuation', 'V0', 'V3')
    'value',       # Computed value
    'est_error',   # Estimated absolute error
]

# ============================================================================
# FIRST-ORDER DEVIATION RECORDS (duhamel)
# ============================================================================

DEVIATION_RECORD_FIELDS: Final[List[str]] = [
    'd',
    'rho',
    'L',
    't',
    'eps',
    'restriction',  # 'all', 'small', 'shell:<n>', 'stationary', 'nonstationary', ...
    'value',
    'est_error',
]

# ============================================================================
# EVOLUTION RECORDS (truncated dynamics)
# ============================================================================

EVOLUTION_RECORD_FIELDS: Final[List[str]] = [
    'rho',
    'L',
    'sector',     # Total momentum index vector joined by ':' (e.g. '1:0'); 'total' for the aggregate
    'basis_size',
    't',
    'deviation',  # ||U(t)Psi0 - Umf(t)Psi0||
    'norm',       # ||U(t)Psi0||
    'leakage',    # Norm in the highest retained excitation number
]

# ============================================================================
# FOURIER TABLE AND CLAIMS
# ============================================================================

FOURIER_TABLE_FIELDS: Final[List[str]] = ['modulus', 'value']

CLAIM_FIELDS: Final[List[str]] = [
    'id',
    'anchor',     # Which bound or law the claim certifies
    'target',
    'measured',
    'tolerance',
    'verdict',    # 'pass' or 'fail'
]

# ============================================================================
# SCAN QUANTITIES
# ============================================================================

SCAN_QUANTITIES: Final[List[str]] = [
    'fluctuations',
    'tail',
    'shells',
    'ere',
    'convolution',
    'deviation1',
    'region',
    'appendixB',
]


def get_fields(record_type: str) -> List[str]:
    """
    Get the column list of a record type.

    Args:
        record_type: One of 'sum', 'deviation', 'evolution', 'fourier', 'claim'

    Returns:
        List[str]: Column names in output order

    Raises:
        ValueError: If record_type is not recognized
    """
    fields_map: Dict[str, List[str]] = {
        'sum': SUM_RECORD_FIELDS,
        'deviation': DEVIATION_RECORD_FIELDS,
        'evolution': EVOLUTION_RECORD_FIELDS,
        'fourier': FOURIER_TABLE_FIELDS,
        'claim': CLAIM_FIELDS,
    }
    if record_type not in fields_map:
        raise ValueError(f"Unknown record type: {record_type}")
    return fields_map[record_type]
