"""Exact propagation of H and H^mf on a particle-hole-truncated basis."""

from .basis import (
    MAX_PAIRS,
    Truncation,
    BasisState,
    Basis,
    build_basis,
)
from .hamiltonian import (
    DynamicsSpec,
    SparseHamiltonian,
    build_hamiltonians,
    hopping_sign,
    kinetic_energy,
    mean_field_correction,
)
from .oracle import antisymmetrized, first_quantized_matrix
from .propagate import KRYLOV_TOL, NORM_DRIFT, propagate
from .evolution import (
    TOTAL_LABEL,
    EvolutionResult,
    aggregate,
    deviation_curve,
    sector_curve,
    sector_label,
)

__all__ = [
    'MAX_PAIRS',
    'Truncation',
    'BasisState',
    'Basis',
    'build_basis',
    'DynamicsSpec',
    'SparseHamiltonian',
    'build_hamiltonians',
    'hopping_sign',
    'kinetic_energy',
    'mean_field_correction',
    'antisymmetrized',
    'first_quantized_matrix',
    'KRYLOV_TOL',
    'NORM_DRIFT',
    'propagate',
    'TOTAL_LABEL',
    'EvolutionResult',
    'aggregate',
    'deviation_curve',
    'sector_curve',
    'sector_label',
]
