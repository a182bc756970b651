#!/usr/bin/env python3
"""
Configuration Management Module
Loads and validates environment variables with fail-fast behavior.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# ============================================================================
# HELPERS - FAIL FAST
# ============================================================================

def _get_int_env(var_name: str, default: int, minimum: int = 1) -> int:
    """
    Read an integer environment variable with fail-fast validation.

    Args:
        var_name: Name of the environment variable
        default: Value used when the variable is unset or empty
        minimum: Smallest accepted value

    Returns:
        int: Parsed value

    Raises:
        ValueError: If the value is not an integer or is below the minimum
    """
    raw = os.getenv(var_name, '').strip()
    if not raw:
        return default
    try:
        value = int(float(raw)) if 'e' in raw.lower() else int(raw)
    except ValueError:
        raise ValueError(
            f"CRITICAL: {var_name} must be an integer, got: {raw}"
        )
    if value < minimum:
        raise ValueError(
            f"CRITICAL: {var_name} must be >= {minimum}, got: {value}"
        )
    return value


def _get_float_env(var_name: str, default: float) -> float:
    """Read a strictly positive float environment variable."""
    raw = os.getenv(var_name, '').strip()
    if not raw:
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"CRITICAL: {var_name} must be a number, got: {raw}")
    if not value > 0.0:
        raise ValueError(f"CRITICAL: {var_name} must be positive, got: {value}")
    return value


# ============================================================================
# PARALLELISM
# ============================================================================

# Default worker-thread count; CLI --threads overrides it
FGT_THREADS = _get_int_env('FGT_THREADS', 1)

# ============================================================================
# RESOURCE BUDGETS
# ============================================================================

# Maximum number of lattice points a single enumeration may produce
MAX_LATTICE_POINTS = _get_int_env('FGT_MAX_POINTS', 100_000_000)

# Maximum size of a truncated many-body basis (per sector)
MAX_BASIS_SIZE = _get_int_env('FGT_BASIS_CAP', 200_000)

# ============================================================================
# NUMERICAL TOLERANCES
# ============================================================================

# Relative tolerance of the radial Fourier transform quadrature
QUADRATURE_RTOL = _get_float_env('FGT_QUAD_RTOL', 1e-10)

# Default relative tolerance of adaptive lattice-sum truncation
TAIL_RTOL = _get_float_env('FGT_TAIL_RTOL', 1e-6)

# ============================================================================
# OUTPUT CONFIGURATION
# ============================================================================

OUTPUT_DIR = Path(os.getenv('FGT_OUTPUT_DIR', 'output').strip() or 'output')

# ============================================================================
# LOGGING CONFIGURATION
# ============================================================================

# Log directory
LOG_DIR = Path(os.getenv('FGT_LOG_DIR', '').strip() or Path(__file__).parent.parent.parent / 'logs')

# Log file path
LOG_FILE = LOG_DIR / 'fermi_gas_tracer.log'

# Log level
LOG_LEVEL = os.getenv('FGT_LOG_LEVEL', 'INFO').strip().upper()

if LOG_LEVEL not in ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']:
    raise ValueError(
        f"CRITICAL: FGT_LOG_LEVEL must be a logging level name, got: {LOG_LEVEL}"
    )

# ============================================================================
# CONFIGURATION SUMMARY
# ============================================================================

def print_config_summary():
    """Print a summary of the current configuration."""
    print("=" * 60)
    print("Configuration Summary")
    print("=" * 60)
    print(f"FGT_THREADS:     {FGT_THREADS}")
    print(f"MAX_POINTS:      {MAX_LATTICE_POINTS}")
    print(f"MAX_BASIS_SIZE:  {MAX_BASIS_SIZE}")
    print(f"QUADRATURE_RTOL: {QUADRATURE_RTOL}")
    print(f"TAIL_RTOL:       {TAIL_RTOL}")
    print(f"OUTPUT_DIR:      {OUTPUT_DIR}")
    print(f"LOG_LEVEL:       {LOG_LEVEL}")
    print(f"LOG_FILE:        {LOG_FILE}")
    print("=" * 60)
