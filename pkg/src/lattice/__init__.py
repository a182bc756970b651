"""Momentum lattices, Fermi seas and lattice-point counting."""

from .lattice import (
    LatticeSpec,
    Momentum,
    FermiSea,
    fermi_momentum,
    enumerate_momenta,
    build_fermi_sea,
    annulus_count,
    ball_indices,
    sort_indices,
    count_norm_sq_at_most,
    max_norm_sq_at_most,
    max_norm_sq_below,
    unit_ball_volume,
    unit_sphere_area,
)

__all__ = [
    'LatticeSpec',
    'Momentum',
    'FermiSea',
    'fermi_momentum',
    'enumerate_momenta',
    'build_fermi_sea',
    'annulus_count',
    'ball_indices',
    'sort_indices',
    'count_norm_sq_at_most',
    'max_norm_sq_at_most',
    'max_norm_sq_below',
    'unit_ball_volume',
    'unit_sphere_area',
]
