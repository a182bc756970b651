#!/usr/bin/env python3
"""
Truncated Hamiltonians
Sparse H and H^mf on a particle-hole basis.

H = (-Δ_y) + Σ_j (-Δ_{x_j}) + Σ_j v(y - x_j); in momentum space the
interaction is L^{-d} Σ F[v](Δ)·a*(p_k + Δ)a(p_k) with the tracer shifted
q → q - Δ, so every off-diagonal entry moves one gas fermion.
"""

from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse

from src.core.exceptions import ConfigurationError
from src.lattice import LatticeSpec
from src.potential import FourierTable, PotentialSpec
from src.sums import SumSpec, recollision_energy
from src.utils.file_manager import ensure_directory
from src.utils.logger import logger

from .basis import Basis, BasisState, Index, Truncation

# Entrywise tolerance of the hermiticity check
HERMITIAN_ATOL = 1e-12


# ============================================================================
# DOMAIN TYPES
# ============================================================================

@dataclass(frozen=True)
class DynamicsSpec:
    """Gas lattice, potential and truncation of a truncated-dynamics run."""
    lattice: LatticeSpec
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    truncation: Truncation = field(default_factory=Truncation)
    threads: int = 1

    def __post_init__(self):
        self.potential.check_fits(self.lattice.L)
        if self.threads < 1:
            raise ConfigurationError(f"threads must be >= 1, got: {self.threads}")

    @property
    def d(self) -> int:
        return self.lattice.d


@dataclass(frozen=True)
class SparseHamiltonian:
    """Hermitian matrix stored as (row, col, value) triplets."""
    size: int
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    hermitian: bool = False

    @classmethod
    def from_entries(cls, size: int, rows, cols, values) -> 'SparseHamiltonian':
        """Build from triplets and record whether the matrix is hermitian."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=complex)
        probe = cls(size, rows, cols, values)
        return cls(size, rows, cols, values, probe.check_hermitian())

    @property
    def nnz(self) -> int:
        return len(self.values)

    @property
    def is_diagonal(self) -> bool:
        return bool(np.all(self.rows == self.cols))

    def to_csr(self) -> sparse.csr_matrix:
        return sparse.csr_matrix((self.values, (self.rows, self.cols)), shape=(self.size, self.size))

    def to_dense(self) -> np.ndarray:
        return self.to_csr().toarray()

    def diagonal(self) -> np.ndarray:
        return self.to_csr().diagonal()

    def check_hermitian(self, atol: float = HERMITIAN_ATOL) -> bool:
        """True when (i, j, v) implies (j, i, conj v) and the diagonal is real."""
        matrix = self.to_csr()
        difference = matrix - matrix.conj().T
        if difference.nnz and np.max(np.abs(difference.data)) > atol:
            return False
        return bool(np.all(np.abs(matrix.diagonal().imag) <= atol))

    def shifted(self, constant: float) -> 'SparseHamiltonian':
        """The matrix plus constant·identity."""
        diag = np.arange(self.size, dtype=np.int64)
        return SparseHamiltonian.from_entries(
            self.size,
            np.concatenate([self.rows, diag]),
            np.concatenate([self.cols, diag]),
            np.concatenate([self.values, np.full(self.size, constant, dtype=complex)]),
        )

    def dump(self, path: Path) -> Path:
        """Write ``row col re im`` lines after a header comment giving the basis size."""
        ensure_directory(Path(path).parent)
        table = np.column_stack([self.rows, self.cols, self.values.real, self.values.imag])
        np.savetxt(path, table, fmt=['%d', '%d', '%.17g', '%.17g'],
                   header=f"size {self.size}\nrow col re im", encoding='utf-8')
        logger.debug(f"Matrix dump written: {path} ({self.nnz} entries)")
        return Path(path)


# ============================================================================
# MATRIX ELEMENTS
# ============================================================================

def _excite(state: BasisState, k: int, l: int, q: Index, N: int) -> BasisState:
    """State after a*(l)a(k) with tracer momentum q."""
    holes = set(state.holes)
    particles = set(state.particles)
    if k < N:
        holes.add(k)
    else:
        particles.discard(k)
    if l < N:
        holes.discard(l)
    else:
        particles.add(l)
    return BasisState(q, tuple(sorted(holes)), tuple(sorted(particles)))


def hopping_sign(occupied: List[int], k: int, l: int) -> int:
    """
    Sign of a*(l)a(k) acting on the ordered product over ``occupied``.

    (-1) raised to the number of occupied ordinals below k, times the number
    below l once k is removed.
    """
    below_k = bisect_left(occupied, k)
    below_l = bisect_left(occupied, l) - (1 if k < l else 0)
    return -1 if (below_k + below_l) % 2 else 1


def kinetic_energy(basis: Basis, state: BasisState) -> float:
    """q² + Σ_occupied p², with exact integer norms before scaling."""
    norm_sq = basis.norm_sq
    total = basis.sea_norm_sq + sum(int(norm_sq[p]) for p in state.particles)
    total -= sum(int(norm_sq[h]) for h in state.holes)
    total += sum(c * c for c in state.q)
    return basis.sea.spec.spacing ** 2 * float(total)


def mean_field_correction(spec: DynamicsSpec) -> float:
    """
    E_re on the dynamics lattice; zero in one dimension.

    The one-dimensional mean-field generator carries no next-to-leading constant.
    """
    if spec.d == 1:
        return 0.0
    return float(recollision_energy(SumSpec(lattice=spec.lattice, potential=spec.potential,
                                            mode='lattice', threads=spec.threads)))


def build_hamiltonians(basis: Basis, table: FourierTable, spec: DynamicsSpec,
                       recollision: Optional[float] = None) -> Tuple[SparseHamiltonian, SparseHamiltonian]:
    """
    Assemble H and H^mf on a truncated basis.

    H has diagonal q² + Σ p² + ρ_eff·F[v](0) and off-diagonal entries
    ±L^{-d}F[v](Δ) between states related by one fermion moving k → k + Δ
    with the tracer recoiling q → q - Δ. H^mf is diagonal with entries
    q² + Σ p² + ρ_eff·F[v](0) - E_re.

    Args:
        basis: Basis from build_basis
        table: Fourier table of the potential in the basis dimension
        spec: Dynamics specification (supplies E_re when not given)
        recollision: E_re override (default: mean_field_correction(spec))

    Returns:
        Tuple[SparseHamiltonian, SparseHamiltonian]: (H, H^mf)
    """
    sea = basis.sea
    h = sea.spec.spacing
    L = sea.L
    if recollision is None:
        recollision = mean_field_correction(spec)
    mean_field = sea.rho_eff * table.transform(0.0)
    coupling: Dict[Index, float] = {}

    def amplitude(delta: Index) -> float:
        if delta not in coupling:
            norm_sq = np.array([sum(c * c for c in delta)])
            coupling[delta] = float(table.at_norm_sq(norm_sq, h, L)[0]) / sea.spec.volume
        return coupling[delta]

    window = [tuple(int(c) for c in row) for row in basis.window]
    sector = basis.sector
    targets = [tuple(a + b for a, b in zip(sector, w)) for w in window]

    rows: List[int] = []
    cols: List[int] = []
    values: List[float] = []
    diagonal = np.empty(len(basis))
    for i, state in enumerate(basis):
        kinetic = kinetic_energy(basis, state)
        diagonal[i] = kinetic
        rows.append(i)
        cols.append(i)
        values.append(kinetic + mean_field)
        occupied = basis.occupied(state)
        occupied_set = set(occupied)
        for k in occupied:
            nk = basis.orbital_tuples[k]
            for q_new in targets:
                delta = tuple(a - b for a, b in zip(state.q, q_new))
                if not any(delta):
                    continue
                l = basis.ordinal.get(tuple(a + b for a, b in zip(nk, delta)))
                if l is None or l in occupied_set:
                    continue
                j = basis.index_of.get(_excite(state, k, l, q_new, sea.N))
                if j is None:
                    continue
                value = hopping_sign(occupied, k, l) * amplitude(delta)
                if value != 0.0:
                    rows.append(j)
                    cols.append(i)
                    values.append(value)

    H = SparseHamiltonian.from_entries(len(basis), rows, cols, values)
    n = np.arange(len(basis), dtype=np.int64)
    Hmf = SparseHamiltonian.from_entries(len(basis), n, n, diagonal + (mean_field - recollision))
    logger.debug(
        f"Hamiltonians sector {sector}: size {len(basis)}, {H.nnz} entries, "
        f"hermitian={H.hermitian}, E_re={recollision:.6g}"
    )
    return H, Hmf
