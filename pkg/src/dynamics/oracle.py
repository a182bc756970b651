#!/usr/bin/env python3
"""
First-Quantized Oracle
Matrix elements ⟨Ψ'|H|Ψ⟩ computed from explicitly antisymmetrized product
states, independent of the operator sign bookkeeping in hamiltonian.py.

Only practical for a handful of gas particles.
"""

import itertools
import math
from typing import Dict, List, Tuple

import numpy as np

from src.potential import FourierTable

from .basis import Basis, BasisState

# (tracer index, orbital ordinal of particle 1, ..., particle N)
Product = Tuple[Tuple[int, ...], Tuple[int, ...]]


def _permutation_parity(perm: Tuple[int, ...]) -> int:
    inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
    return -1 if inversions % 2 else 1


def antisymmetrized(basis: Basis, state: BasisState) -> Dict[Product, float]:
    """
    (N!)^{-1/2} Σ_σ sgn(σ) |q; o_σ(1), ..., o_σ(N)⟩ over the ascending occupied ordinals o.
    """
    occupied = basis.occupied(state)
    scale = 1.0 / math.sqrt(math.factorial(len(occupied)))
    out: Dict[Product, float] = {}
    for perm in itertools.permutations(range(len(occupied))):
        out[(state.q, tuple(occupied[i] for i in perm))] = _permutation_parity(perm) * scale
    return out


def _apply(basis: Basis, table: FourierTable, psi: Dict[Product, float]) -> Dict[Product, float]:
    """H acting on a first-quantized state, kept to products inside the orbital set."""
    h = basis.sea.spec.spacing
    volume = basis.sea.spec.volume
    orbitals = basis.orbital_tuples
    coupling: Dict[Tuple[int, ...], float] = {}

    def amplitude(delta: Tuple[int, ...]) -> float:
        if delta not in coupling:
            norm_sq = np.array([sum(c * c for c in delta)])
            coupling[delta] = float(table.at_norm_sq(norm_sq, h, basis.sea.L)[0]) / volume
        return coupling[delta]

    out: Dict[Product, float] = {}
    for (q, particles), value in psi.items():
        kinetic = sum(c * c for c in q) + sum(int(basis.norm_sq[o]) for o in particles)
        out[(q, particles)] = out.get((q, particles), 0.0) + h * h * kinetic * value
        for j, o in enumerate(particles):
            for target, n_target in enumerate(orbitals):
                delta = tuple(a - b for a, b in zip(n_target, orbitals[o]))
                moved = particles[:j] + (target,) + particles[j + 1:]
                key = (tuple(a - b for a, b in zip(q, delta)), moved)
                out[key] = out.get(key, 0.0) + amplitude(delta) * value
    return out


def first_quantized_matrix(basis: Basis, table: FourierTable) -> np.ndarray:
    """
    Dense matrix ⟨Ψ_i|H|Ψ_j⟩ over a basis, H without any mean-field constant.

    Args:
        basis: Basis of a small gas
        table: Fourier table of the potential

    Returns:
        np.ndarray: Real symmetric matrix of size len(basis)
    """
    states: List[Dict[Product, float]] = [antisymmetrized(basis, s) for s in basis]
    matrix = np.zeros((len(basis), len(basis)))
    for j, psi in enumerate(states):
        image = _apply(basis, table, psi)
        for i, bra in enumerate(states):
            matrix[i, j] = math.fsum(value * image.get(key, 0.0) for key, value in bra.items())
    return matrix
