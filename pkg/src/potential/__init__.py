"""Interaction potential and its Fourier transform."""

from .potential import (
    PotentialSpec,
    FourierTable,
    PaleyWienerAudit,
    fourier_transform,
    split_small_large,
    paley_wiener_audit,
)

__all__ = [
    'PotentialSpec',
    'FourierTable',
    'PaleyWienerAudit',
    'fourier_transform',
    'split_small_large',
    'paley_wiener_audit',
]
