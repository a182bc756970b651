#!/usr/bin/env python3
"""
Deviation Curves
‖U(t)Ψ₀ - U^mf(t)Ψ₀‖ for Ψ₀ = φ ⊗ Ω₀ on the truncated basis.

Total momentum is conserved by H and H^mf, and the component of Ψ₀ in the
sector K is φ̂(K)·(K, Ω₀), so every occupied tracer mode is one independent
run and the sectors combine with weights |φ̂(K)|².
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import ConfigurationError, NumericalError
from src.duhamel import TracerState
from src.lattice import FermiSea, build_fermi_sea
from src.potential import FourierTable
from src.sums import fourier_table
from src.utils.logger import logger
from src.utils.parallel import parallel_map

from .basis import Index, build_basis
from .hamiltonian import DynamicsSpec, build_hamiltonians, mean_field_correction
from .propagate import NORM_DRIFT, propagate

TOTAL_LABEL = 'total'


def sector_label(sector: Sequence[int]) -> str:
    """Index vector written as components joined by ':'."""
    return ':'.join(str(int(c)) for c in sector)


# ============================================================================
# RESULT TYPE
# ============================================================================

@dataclass(frozen=True)
class EvolutionResult:
    """
    Deviation, norm and leakage on a time grid for one sector or the aggregate.

    ``leakage`` is the norm of U(t)Ψ₀ carried by states with the largest
    retained number of pairs (zero when P = 0).
    """
    times: Tuple[float, ...]
    deviation: np.ndarray = field(repr=False)
    norm: np.ndarray = field(repr=False)
    leakage: np.ndarray = field(repr=False)
    sector: str = TOTAL_LABEL
    basis_size: int = 0
    weight: float = 1.0
    sectors: Tuple['EvolutionResult', ...] = field(default=(), repr=False)

    def __post_init__(self):
        drift = np.max(np.abs(self.norm - 1.0), initial=0.0)
        if drift > NORM_DRIFT:
            raise NumericalError(f"Sector {self.sector}: norm drift {drift:.3g} exceeds {NORM_DRIFT:g}",
                                 achieved=float(drift))

    def at(self, t: float) -> float:
        """Deviation at an output time."""
        return float(self.deviation[self.times.index(float(t))])

    def records(self, rho: float, L: float) -> List[Dict[str, object]]:
        """Rows with EVOLUTION_RECORD_FIELDS: every sector, then the aggregate."""
        rows = []
        for result in self.sectors + (self,):
            for i, t in enumerate(result.times):
                rows.append({
                    'rho': rho,
                    'L': L,
                    'sector': result.sector,
                    'basis_size': result.basis_size,
                    't': t,
                    'deviation': float(result.deviation[i]),
                    'norm': float(result.norm[i]),
                    'leakage': float(result.leakage[i]),
                })
        return rows


# ============================================================================
# SECTOR RUNS
# ============================================================================

def sector_curve(sea: FermiSea, table: FourierTable, spec: DynamicsSpec, sector: Index,
                 times: Sequence[float], recollision: float, weight: float = 1.0,
                 shift: float = 0.0) -> EvolutionResult:
    """
    Propagate (K, Ω₀) under H and H^mf within one sector.

    Args:
        sea: Fermi sea of the gas
        table: Fourier table of the potential
        spec: Dynamics specification
        sector: Total momentum index K
        times: Output times
        recollision: E_re entering H^mf
        weight: |φ̂(K)|²
        shift: Constant added to both generators

    Returns:
        EvolutionResult: Curves of this sector
    """
    basis = build_basis(sea, spec.truncation, sector)
    H, Hmf = build_hamiltonians(basis, table, spec, recollision)
    if shift:
        H, Hmf = H.shifted(shift), Hmf.shifted(shift)
    psi0 = np.zeros(len(basis), dtype=complex)
    psi0[0] = 1.0
    exact = propagate(H, psi0, times)
    mean_field = propagate(Hmf, psi0, times)

    top = basis.excitation_numbers() == spec.truncation.pairs
    if spec.truncation.pairs == 0:
        top[:] = False
    deviation = np.array([np.linalg.norm(a - b) for a, b in zip(exact, mean_field)])
    norm = np.array([np.linalg.norm(a) for a in exact])
    leakage = np.array([np.linalg.norm(a[top]) for a in exact])
    return EvolutionResult(tuple(float(t) for t in times), deviation, norm, leakage,
                           sector_label(sector), len(basis), weight)


def aggregate(sectors: Sequence[EvolutionResult]) -> EvolutionResult:
    """
    Combine sector curves: each total is (Σ_K |φ̂(K)|²·x_K(t)²)^{1/2}.

    Raises:
        ConfigurationError: If the sectors do not share a time grid
    """
    if not sectors:
        raise ConfigurationError("No sectors to aggregate")
    times = sectors[0].times
    if any(s.times != times for s in sectors):
        raise ConfigurationError("Sector curves live on different time grids")
    weights = np.array([s.weight for s in sectors])

    def combine(name: str) -> np.ndarray:
        stacked = np.vstack([getattr(s, name) for s in sectors])
        return np.sqrt(np.sum(weights[:, None] * stacked ** 2, axis=0) / np.sum(weights))

    return EvolutionResult(times, combine('deviation'), combine('norm'), combine('leakage'),
                           TOTAL_LABEL, sum(s.basis_size for s in sectors), float(np.sum(weights)),
                           tuple(sectors))


# ============================================================================
# DEVIATION CURVE
# ============================================================================

def deviation_curve(spec: DynamicsSpec, state: TracerState, times: Sequence[float],
                    recollision: Optional[float] = None, shift: float = 0.0) -> EvolutionResult:
    """
    ‖U(t)Ψ₀ - U^mf(t)Ψ₀‖ within the truncation, one run per occupied sector.

    Args:
        spec: Gas lattice, potential and truncation
        state: Tracer state on the same lattice as the gas
        times: Nonnegative, nondecreasing output times
        recollision: E_re override (default: computed on the dynamics lattice; 0 in d=1)
        shift: Constant added to both generators

    Returns:
        EvolutionResult: Aggregate curves with the per-sector curves in ``sectors``

    Raises:
        ConfigurationError: If the tracer lives on another lattice
        ResourceLimitError: If a sector basis exceeds the cap
        NumericalError: If a propagation fails
    """
    if state.d != spec.d or not math.isclose(state.L, spec.lattice.L, rel_tol=1e-12):
        raise ConfigurationError(
            f"Tracer state (d={state.d}, L={state.L}) does not live on the gas lattice "
            f"(d={spec.d}, L={spec.lattice.L})"
        )
    logger.info(
        f"Truncated dynamics d={spec.d} rho={spec.lattice.rho:g} L={spec.lattice.L:g}: "
        f"{len(state.amplitudes)} sectors, P={spec.truncation.pairs}, {len(times)} times"
    )
    sea = build_fermi_sea(spec.lattice)
    table = fourier_table(spec.potential, spec.d)
    if recollision is None:
        recollision = mean_field_correction(spec)
    occupied = sorted((k, abs(a) ** 2) for k, a in state.amplitudes.items() if a != 0)

    def run(item: Tuple[Index, float]) -> EvolutionResult:
        sector, weight = item
        return sector_curve(sea, table, spec, sector, times, recollision, weight, shift)

    result = aggregate(parallel_map(run, occupied, spec.threads))
    logger.info(
        f"Truncated dynamics done: basis {result.basis_size} states over {len(occupied)} sectors, "
        f"max deviation {float(np.max(result.deviation, initial=0.0)):.6g}"
    )
    return result
