#!/usr/bin/env python3
"""
Fermi-Sea Sums
Fluctuation sums, large-transfer tails, shell counts, the recollision energy
and the single-momentum convolution sum, each on a finite lattice or in the
thermodynamic limit.
"""

import math
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from src.core.definitions import SUM_RECORD_FIELDS
from src.core.exceptions import ConfigurationError
from src.lattice import (
    LatticeSpec,
    Momentum,
    build_fermi_sea,
    fermi_momentum,
    max_norm_sq_below,
)
from src.potential import FourierTable, PotentialSpec
from src.utils.logger import logger

from .continuum import ContinuumEngine
from .lattice_sums import LatticeSumEngine, PairBlock, tail_remainder_bound
from .spec import ShellDecomposition, SumSpec, shell_exponents

# Order of the Paley–Wiener envelope used for every tail remainder
DECAY_ORDER = 8

# Truncation budgets in units of 2π/R beyond the lower transfer limit
_BUDGET_PERIODS = {1: 64.0}
_DEFAULT_BUDGET_PERIODS = 20.0


class SumValue(float):
    """A sum value carrying its estimated absolute error."""

    def __new__(cls, value: float, est_error: float = 0.0):
        obj = super().__new__(cls, value)
        obj.est_error = float(est_error)
        return obj


# ============================================================================
# SHARED STATE
# ============================================================================

@lru_cache(maxsize=32)
def fourier_table(potential: PotentialSpec, d: int) -> FourierTable:
    """Process-wide Fourier table per (potential, dimension)."""
    return FourierTable(potential, d)


@lru_cache(maxsize=8)
def _lattice_engine(lattice: LatticeSpec, potential: PotentialSpec, threads: int) -> LatticeSumEngine:
    return LatticeSumEngine(build_fermi_sea(lattice), fourier_table(potential, lattice.d), threads)


@lru_cache(maxsize=32)
def _continuum_engine(d: int, rho: float, potential: PotentialSpec) -> ContinuumEngine:
    return ContinuumEngine(d, rho, fourier_table(potential, d))


def lattice_engine(spec: SumSpec) -> LatticeSumEngine:
    """Finite-lattice engine (sea and Fourier cache) shared by all sums of a spec."""
    return _lattice_engine(spec.lattice, spec.potential, spec.threads)


def continuum_engine(spec: SumSpec) -> ContinuumEngine:
    """Thermodynamic-limit engine for the spec's dimension and density."""
    return _continuum_engine(spec.d, spec.rho, spec.potential)


def _budget(spec: SumSpec, lower: float, q: int) -> float:
    periods = _BUDGET_PERIODS.get(q, _DEFAULT_BUDGET_PERIODS)
    return lower + periods * 2.0 * math.pi / spec.potential.R


def _decay_constant(spec: SumSpec, budget: float) -> float:
    return fourier_table(spec.potential, spec.d).decay_audit(DECAY_ORDER, p_max=budget).D


# ============================================================================
# TRANSFER-ONLY SUMS
# ============================================================================

def _transfer_quantity(spec: SumSpec, q: int, lower: float, crescent: bool,
                       prefactor: float) -> SumValue:
    """
    Truncated Σ_{|Δ| >= lower} |F[v](Δ)|^q·(crescent count or 1) in either mode.

    ``prefactor`` multiplies the per-transfer remainder integral
    (2π)^{-d}∫|F|^q; it is the density for pair sums and 1 for lattice sums.
    """
    if spec.potential.A == 0.0:
        return SumValue(0.0)
    budget = _budget(spec, lower, q)
    D = _decay_constant(spec, budget)
    if spec.mode == 'lattice':
        engine = lattice_engine(spec)
        weight = engine.potential_power(q)
        density = engine.sea.rho_eff if crescent else 1.0
        value, bound, cutoff = engine.truncated(
            lambda lo_sq, hi_sq: engine.transfer_sum(weight, lo_sq, hi_sq, crescent),
            lambda c: tail_remainder_bound(D, q, spec.d, c, density * prefactor),
            lower, spec.tail_rtol, budget=budget,
            norm=None if crescent else engine.sea.spec.volume ** -1,
        )
    else:
        engine = continuum_engine(spec)
        weight = engine.magnitude(q)
        density = spec.rho if crescent else 1.0
        value, bound, cutoff = engine.truncated(
            lambda a, b: engine.transfer_integral(weight, a, b, crescent),
            lambda c: tail_remainder_bound(D, q, spec.d, c, density * prefactor),
            lower, spec.tail_rtol, budget=budget,
        )
    logger.debug(f"Transfer sum q={q} from {lower:.4g}: cutoff {cutoff:.4g}, bound {bound:.3g}")
    return SumValue(max(value, 0.0), bound)


def fluctuation_sum(spec: SumSpec) -> SumValue:
    """
    L^{-2d} Σ_{k<=N} Σ_{l>N} |F[v](p_k - p_l)|^q, or its continuum integral.

    Args:
        spec: Sum specification (q selects the power)

    Returns:
        SumValue: Nonnegative value with its truncation/quadrature error

    Raises:
        NumericalError: If the tail bound cannot reach the tolerance
    """
    logger.info(f"Fluctuation sum d={spec.d} rho={spec.rho:g} q={spec.q} ({spec.mode})")
    return _transfer_quantity(spec, spec.q, 0.0, True, 1.0)


def large_tail_sum(spec: SumSpec) -> SumValue:
    """
    Fluctuation sum of the large-transfer part F[v^{ℓ,ε}] (|Δ| >= ρ^ε only).

    Raises:
        NumericalError: If the tail bound cannot reach the tolerance
    """
    logger.info(f"Large-transfer tail d={spec.d} rho={spec.rho:g} eps={spec.eps} q={spec.q} ({spec.mode})")
    return _transfer_quantity(spec, spec.q, spec.transfer_cut, True, 1.0)


def convolution_sum(spec: SumSpec, p: Optional[Momentum] = None) -> SumValue:
    """
    L^{-d} Σ_k |F[v](p_k - p)| over the whole lattice.

    The lattice is invariant under shifts by p, so the value does not depend
    on p; p is validated against the box in lattice mode.

    Args:
        spec: Sum specification
        p: Lattice momentum (optional)

    Returns:
        SumValue: Nonnegative value with its error estimate
    """
    if p is not None and spec.mode == 'lattice':
        if p.d != spec.d or p.L != spec.lattice.L:
            raise ConfigurationError(f"Momentum {p.index} (L={p.L}) does not live on the lattice of {spec.lattice}")
    logger.info(f"Convolution sum d={spec.d} rho={spec.rho:g} ({spec.mode})")
    return _transfer_quantity(spec, 1, 0.0, False, 1.0)


# ============================================================================
# PAIR SUMS
# ============================================================================

def recollision_energy(spec: SumSpec) -> SumValue:
    """
    E_re = L^{-2d} Σ_{k<=N} Σ_{l>N} |F[v](p_k - p_l)|²/(p_l² - p_k²)·θ(|p_l| - |p_k| - ρ^{-1/2}).

    θ(0) = 1; the cutoff uses the requested density.

    Args:
        spec: Sum specification

    Returns:
        SumValue: Value (> 0 for A != 0) with its error estimate

    Raises:
        NumericalError: If the tail bound cannot reach the tolerance
    """
    logger.info(f"Recollision energy d={spec.d} rho={spec.rho:g} ({spec.mode})")
    if spec.potential.A == 0.0:
        return SumValue(0.0)
    theta = spec.rho ** -0.5
    budget = _budget(spec, 0.0, 2)
    D = _decay_constant(spec, budget)
    # every admissible pair has p_l² - p_k² >= k_F·ρ^{-1/2}
    gap_floor = fermi_momentum(spec.lattice) * theta
    if spec.mode == 'lattice':
        engine = lattice_engine(spec)
        table = engine.table

        def kernel(block: PairBlock) -> np.ndarray:
            weights = np.abs(table.at_norm_sq(block.dn2, block.spacing, engine.sea.L)) ** 2
            return np.where(block.modulus_gap >= theta, weights / block.gap, 0.0)

        value, bound, _ = engine.truncated(
            lambda lo_sq, hi_sq: engine.pair_sum(kernel, hi_sq, lo_sq + 1, normalized=False),
            lambda c: tail_remainder_bound(D, 2, spec.d, c, engine.sea.rho_eff / gap_floor),
            0.0, spec.tail_rtol, budget=budget,
        )
    else:
        engine = continuum_engine(spec)
        weight = engine.magnitude(2)
        value, bound, _ = engine.truncated(
            lambda a, b: engine.pair_integral(weight, lambda w: 1.0 / w, a, b, lo=theta),
            lambda c: tail_remainder_bound(D, 2, spec.d, c, spec.rho / gap_floor),
            0.0, spec.tail_rtol, budget=budget,
        )
    return SumValue(value, bound)


def _unit(_: float) -> float:
    return 1.0


def shell_index(gaps: np.ndarray, edges: Sequence[float]) -> np.ndarray:
    """
    Shell n of each gap with edges[n] <= gap < edges[n+1].

    A gap equal to an edge belongs to the shell above it. The edges ρ^{-b_n}
    are irrational, so the comparison is in floating point against the
    factored gap (n_l² - n_k²)/(|n_l| + |n_k|).

    Args:
        gaps: |p_l| - |p_k| per pair, below the last edge
        edges: Shell edges for n = 0..M+1 (edges[0] = 0)

    Returns:
        np.ndarray: Shell indices in 0..M
    """
    return np.searchsorted(np.asarray(edges[1:-1], dtype=float), gaps, side='right')


def shell_decomposition(spec: SumSpec, keep_pairs: bool = True) -> ShellDecomposition:
    """
    Split the small-transfer pair set by the distance |p_l| - |p_k| to the Fermi surface.

    Shell 0 holds gaps below ρ^{-b_1}; shell n >= 1 holds ρ^{-b_n} <= gap < ρ^{-b_{n+1}};
    every pair has |p_l - p_k| < ρ^ε, so the shells partition the whole set.

    Args:
        spec: Sum specification (M, ε and b set the schedule)
        keep_pairs: Retain the per-shell (k, l) index lists (lattice mode)

    Returns:
        ShellDecomposition: Per-shell measures and the directly computed total
    """
    M = spec.shells
    exponents = shell_exponents(spec.eps, M, spec.b)
    edges = spec.shell_edges()
    two_c = 1.0 / (spec.b + spec.eps)
    cut = spec.transfer_cut
    logger.info(f"Shell decomposition d={spec.d} rho={spec.rho:g} eps={spec.eps} M={M} ({spec.mode})")
    if spec.mode == 'lattice':
        engine = lattice_engine(spec)
        max_sq = max_norm_sq_below(cut, engine.h)
        counts = np.zeros(M + 1, dtype=np.int64)
        shards: List[List[np.ndarray]] = [[] for _ in range(M + 1)]
        for block in engine.pair_blocks(max_sq):
            shell = shell_index(block.modulus_gap, edges)
            counts += np.bincount(shell, minlength=M + 1)
            if keep_pairs:
                rows = np.hstack([block.k, block.l])
                for n in np.unique(shell):
                    shards[n].append(rows[shell == n])
        norm = engine.norm
        total = norm * engine.transfer_sum(lambda m, s: np.ones_like(m), 0, max_sq)
        pairs = None
        if keep_pairs:
            width = 2 * spec.d
            pairs = [np.vstack(s) if s else np.zeros((0, width), dtype=np.int64) for s in shards]
        return ShellDecomposition(exponents, edges, two_c, norm * counts.astype(float),
                                  'lattice', total, pairs)
    engine = continuum_engine(spec)
    measures = [engine.pair_integral(_unit, _unit, 0.0, cut, lo=edges[n], hi=edges[n + 1])[0]
                for n in range(M + 1)]
    total, _ = engine.transfer_integral(_unit, 0.0, cut)
    return ShellDecomposition(exponents, edges, two_c, np.asarray(measures), 'continuum', total)


# ============================================================================
# ENERGY GAPS
# ============================================================================

MomentumLike = Union[Momentum, Sequence[float], np.ndarray]


def energy_gap(k: MomentumLike, l: MomentumLike) -> float:
    """
    p_l² - p_k² in the factored form (p_l - p_k)·(p_l + p_k).

    Lattice momenta are combined on their integer indices, so the result is
    exact up to a single rounding.

    Args:
        k: Hole momentum
        l: Particle momentum

    Returns:
        float: The kinetic energy gap
    """
    if isinstance(k, Momentum) and isinstance(l, Momentum):
        if k.L != l.L:
            raise ConfigurationError(f"Momenta live on different lattices: L={k.L} and L={l.L}")
        nk = np.asarray(k.index, dtype=np.int64)
        nl = np.asarray(l.index, dtype=np.int64)
        h = 2.0 * math.pi / k.L
        return h * h * float(np.dot(nl - nk, nl + nk))
    pk = k.p if isinstance(k, Momentum) else np.asarray(k, dtype=float)
    pl = l.p if isinstance(l, Momentum) else np.asarray(l, dtype=float)
    return float(np.dot(pl - pk, pl + pk))


def modulus_gap(k: MomentumLike, l: MomentumLike) -> float:
    """|p_l| - |p_k| = (p_l² - p_k²)/(|p_l| + |p_k|)."""
    pk = k.p if isinstance(k, Momentum) else np.asarray(k, dtype=float)
    pl = l.p if isinstance(l, Momentum) else np.asarray(l, dtype=float)
    total = float(np.linalg.norm(pl) + np.linalg.norm(pk))
    return energy_gap(k, l) / total if total > 0.0 else 0.0


def energy_gap_lower_bound(spec: SumSpec, n: int) -> float:
    """
    k_F·ρ^{-b_n}, a lower bound on p_l² - p_k² for every pair of shell n.

    Every particle momentum lies strictly outside the continuum Fermi ball,
    so the bound also holds on the lattice.
    """
    exponents = shell_exponents(spec.eps, spec.shells, spec.b)
    if not 0 <= n <= spec.shells:
        raise ConfigurationError(f"Shell index must lie in 0..{spec.shells}, got: {n}")
    if math.isinf(exponents[n]):
        return 0.0
    return fermi_momentum(spec.lattice) * spec.rho ** (-exponents[n])


# ============================================================================
# RECORDS
# ============================================================================

def sum_records(spec: SumSpec, quantity: str) -> List[Dict[str, object]]:
    """
    Evaluate one scan quantity and return rows with the sum record columns.

    Args:
        spec: Sum specification
        quantity: 'fluctuations', 'tail', 'shells', 'ere' or 'convolution'

    Returns:
        List[Dict[str, object]]: One row per value ('shells' gives V0..VM)
    """
    if quantity == 'shells':
        decomposition = shell_decomposition(spec, keep_pairs=False)
        values = {f'V{n}': SumValue(v) for n, v in enumerate(decomposition.counts)}
        values['S'] = SumValue(decomposition.total)
    elif quantity == 'fluctuations':
        values = {'fluctuation': fluctuation_sum(spec)}
    elif quantity == 'tail':
        values = {'tail': large_tail_sum(spec)}
    elif quantity == 'ere':
        values = {'ere': recollision_energy(spec)}
    elif quantity == 'convolution':
        values = {'convolution': convolution_sum(spec)}
    else:
        raise ConfigurationError(f"Not a sums quantity: {quantity}")
    return [sum_record(spec, name, value) for name, value in values.items()]


def sum_record(spec: SumSpec, quantity: str, value: float) -> Dict[str, object]:
    """One row with the sum record columns."""
    row = {
        'mode': spec.mode,
        'd': spec.d,
        'rho': spec.rho,
        'L': spec.lattice.L if spec.mode == 'lattice' else None,
        'eps': spec.eps,
        'M': spec.shells,
        'q': spec.q,
        'quantity': quantity,
        'value': float(value),
        'est_error': float(getattr(value, 'est_error', 0.0)),
    }
    return {field: row[field] for field in SUM_RECORD_FIELDS}
