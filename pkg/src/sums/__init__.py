"""Lemma-level sums over the Fermi sea, on the lattice and in the continuum."""

from .spec import (
    MODES,
    SumSpec,
    ShellDecomposition,
    default_shell_count,
    shell_exponents,
)
from .lattice_sums import LatticeSumEngine, PairBlock, tail_remainder_bound
from .continuum import ContinuumEngine, slice_measure, slice_breakpoints
from .sums import (
    DECAY_ORDER,
    SumValue,
    fourier_table,
    lattice_engine,
    continuum_engine,
    fluctuation_sum,
    large_tail_sum,
    convolution_sum,
    recollision_energy,
    shell_decomposition,
    shell_index,
    energy_gap,
    modulus_gap,
    energy_gap_lower_bound,
    sum_records,
    sum_record,
)

__all__ = [
    'MODES',
    'SumSpec',
    'ShellDecomposition',
    'default_shell_count',
    'shell_exponents',
    'LatticeSumEngine',
    'PairBlock',
    'tail_remainder_bound',
    'ContinuumEngine',
    'slice_measure',
    'slice_breakpoints',
    'DECAY_ORDER',
    'SumValue',
    'fourier_table',
    'lattice_engine',
    'continuum_engine',
    'fluctuation_sum',
    'large_tail_sum',
    'convolution_sum',
    'recollision_energy',
    'shell_decomposition',
    'shell_index',
    'energy_gap',
    'modulus_gap',
    'energy_gap_lower_bound',
    'sum_records',
    'sum_record',
]
