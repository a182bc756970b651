#!/usr/bin/env python3
"""
Momentum Lattice and Fermi Sea
Construction of (2π/L)Z^d, shell-complete Fermi seas and lattice-point counts.

All membership and ordering decisions are taken on integer index vectors n
and their exact squared norms |n|², never on floating |p|.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.config import MAX_LATTICE_POINTS
from src.core.exceptions import (
    ConfigurationError,
    DegenerateSeaError,
    ResourceLimitError,
)
from src.utils.logger import logger

# Relative slack used when a physical radius is turned into an integer bound on
# |n|²; keeps points sitting exactly on a requested radius on the inclusive side.
_RADIUS_SLACK = 1e-12


# ============================================================================
# GEOMETRY HELPERS
# ============================================================================

def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in d dimensions."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def unit_sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^{d-1} (2 for d=1)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def max_norm_sq_at_most(radius: float, spacing: float) -> int:
    """Largest integer m with m <= (radius/spacing)², or -1 for a negative radius."""
    if radius < 0.0:
        return -1
    return int(math.floor((radius / spacing) ** 2 * (1.0 + _RADIUS_SLACK)))


def max_norm_sq_below(radius: float, spacing: float) -> int:
    """Largest integer m with m < (radius/spacing)²."""
    if radius <= 0.0:
        return -1
    return int(math.ceil((radius / spacing) ** 2 * (1.0 - _RADIUS_SLACK))) - 1


def count_norm_sq_at_most(d: int, m: int) -> int:
    """
    Exact number of integer vectors n in Z^d with |n|² <= m.

    Args:
        d: Dimension (1, 2 or 3)
        m: Integer bound on the squared norm

    Returns:
        int: Lattice point count (0 for m < 0)
    """
    if m < 0:
        return 0
    if d == 1:
        return 2 * math.isqrt(m) + 1
    r = math.isqrt(m)
    return sum(count_norm_sq_at_most(d - 1, m - x * x) for x in range(-r, r + 1))


# ============================================================================
# DOMAIN TYPES
# ============================================================================

@dataclass(frozen=True)
class LatticeSpec:
    """Dimension, box side and target density of a periodic momentum lattice."""
    d: int
    L: float
    rho: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ConfigurationError(f"Dimension must be 1, 2 or 3, got: {self.d}")
        for name in ('L', 'rho'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ConfigurationError(f"{name} must be positive and finite, got: {value}")

    @property
    def spacing(self) -> float:
        """Lattice spacing 2π/L."""
        return 2.0 * math.pi / self.L

    @property
    def volume(self) -> float:
        """Box volume L^d."""
        return self.L ** self.d


@dataclass(frozen=True)
class Momentum:
    """Lattice momentum p = (2π/L)·n stored by its integer index vector."""
    index: Tuple[int, ...]
    L: float

    @property
    def d(self) -> int:
        return len(self.index)

    @property
    def norm_sq_index(self) -> int:
        """Exact |n|²."""
        return sum(c * c for c in self.index)

    @property
    def p(self) -> np.ndarray:
        """Physical momentum vector."""
        return (2.0 * math.pi / self.L) * np.asarray(self.index, dtype=float)

    @property
    def modulus(self) -> float:
        """|p|."""
        return (2.0 * math.pi / self.L) * math.sqrt(self.norm_sq_index)

    def __add__(self, other: 'Momentum') -> 'Momentum':
        return Momentum(tuple(a + b for a, b in zip(self.index, other.index)), self.L)

    def __sub__(self, other: 'Momentum') -> 'Momentum':
        return Momentum(tuple(a - b for a, b in zip(self.index, other.index)), self.L)


@dataclass(frozen=True)
class FermiSea:
    """
    Shell-complete Fermi sea.

    ``indices`` holds the occupied index vectors ordered by (|n|², lexicographic
    index); every n with |n|² <= ``norm_sq_max`` is occupied and nothing else.
    """
    spec: LatticeSpec
    indices: np.ndarray = field(repr=False)
    norm_sq_max: int
    k_F: float
    N: int
    rho_eff: float

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def L(self) -> float:
        return self.spec.L

    @property
    def momenta(self) -> np.ndarray:
        """Occupied physical momenta, shape (N, d)."""
        return self.spec.spacing * self.indices.astype(float)

    @property
    def kinetic_energy(self) -> float:
        """Σ_k p_k² over the sea."""
        return self.spec.spacing ** 2 * float(np.sum(self.indices.astype(np.int64) ** 2))

    def contains(self, index) -> bool:
        """True when the lattice index vector is occupied."""
        return int(np.dot(index, index)) <= self.norm_sq_max

    def momentum_list(self) -> List[Momentum]:
        """Occupied momenta as Momentum objects, in sea order."""
        return [Momentum(tuple(int(c) for c in row), self.L) for row in self.indices]


# ============================================================================
# ENUMERATION
# ============================================================================

def sort_indices(indices: np.ndarray) -> np.ndarray:
    """Sort index vectors by (|n|², n_1, ..., n_d)."""
    if len(indices) == 0:
        return indices
    norm_sq = np.sum(indices * indices, axis=1)
    keys = tuple(indices[:, c] for c in reversed(range(indices.shape[1]))) + (norm_sq,)
    return indices[np.lexsort(keys)]


def ball_indices(d: int, m: int, max_points: Optional[int] = None) -> np.ndarray:
    """
    All integer vectors with |n|² <= m, sorted by (|n|², lexicographic).

    Args:
        d: Dimension
        m: Integer bound on |n|²
        max_points: Point budget (default: FGT_MAX_POINTS)

    Returns:
        np.ndarray: int64 array of shape (count, d)

    Raises:
        ResourceLimitError: If the point count exceeds the budget
    """
    if max_points is None:
        max_points = MAX_LATTICE_POINTS
    if m < 0:
        return np.zeros((0, d), dtype=np.int64)
    estimate = unit_ball_volume(d) * m ** (d / 2.0)
    if estimate > 1.05 * max_points + 100:
        raise ResourceLimitError(
            f"Enumeration of |n|^2 <= {m} in d={d} needs ~{estimate:.3g} points "
            f"(budget {max_points})"
        )
    r = math.isqrt(m)
    axis = np.arange(-r, r + 1, dtype=np.int64)
    if d == 1:
        return sort_indices(axis.reshape(-1, 1))
    slices = []
    # One slab per first coordinate keeps peak memory at O(r^(d-1))
    for x in axis:
        rest = m - int(x) * int(x)
        s = math.isqrt(rest)
        sub = np.arange(-s, s + 1, dtype=np.int64)
        grids = np.meshgrid(*([sub] * (d - 1)), indexing='ij')
        tail = np.stack([g.ravel() for g in grids], axis=1)
        tail = tail[np.sum(tail * tail, axis=1) <= rest]
        head = np.full((len(tail), 1), x, dtype=np.int64)
        slices.append(np.hstack([head, tail]))
    points = np.vstack(slices)
    if len(points) > max_points:
        raise ResourceLimitError(
            f"Enumeration produced {len(points)} points (budget {max_points})"
        )
    return sort_indices(points)


def enumerate_momenta(spec: LatticeSpec, cutoff: float,
                      max_points: Optional[int] = None) -> List[Momentum]:
    """
    All lattice momenta with |p| <= cutoff in the documented order.

    Args:
        spec: Lattice specification
        cutoff: Physical momentum cutoff (> 0)
        max_points: Optional point budget

    Returns:
        List[Momentum]: Sorted by (|p|, lexicographic index)

    Raises:
        ConfigurationError: If cutoff is not positive
        ResourceLimitError: If the count exceeds the budget
    """
    if not cutoff > 0.0:
        raise ConfigurationError(f"cutoff must be positive, got: {cutoff}")
    m = max_norm_sq_at_most(cutoff, spec.spacing)
    indices = ball_indices(spec.d, m, max_points)
    return [Momentum(tuple(int(c) for c in row), spec.L) for row in indices]


# ============================================================================
# FERMI SEA
# ============================================================================

def fermi_momentum(spec: LatticeSpec) -> float:
    """
    Fermi momentum of the continuum relation ρ = vol(B_1)·k_F^d/(2π)^d.

    Args:
        spec: Lattice specification (only d and ρ are used)

    Returns:
        float: k_F (√(4πρ) in d=2, πρ in d=1, (6π²ρ)^{1/3} in d=3)
    """
    if spec.d == 1:
        return math.pi * spec.rho
    if spec.d == 2:
        return math.sqrt(4.0 * math.pi * spec.rho)
    return (6.0 * math.pi ** 2 * spec.rho) ** (1.0 / 3.0)


def build_fermi_sea(spec: LatticeSpec, max_points: Optional[int] = None) -> FermiSea:
    """
    Occupy every lattice point with |p| <= k_F(spec).

    Occupation by a bound on |n|² is shell-complete by construction; the
    reported k_F is |p_N|, the radius of the outermost occupied shell.

    Args:
        spec: Lattice specification
        max_points: Optional point budget

    Returns:
        FermiSea: The sea with its effective density

    Raises:
        DegenerateSeaError: If ρ·L^d < 1
    """
    if spec.rho * spec.volume < 1.0:
        raise DegenerateSeaError(
            f"rho*L^d = {spec.rho * spec.volume:.6g} < 1: the sea would be empty"
        )
    m = max_norm_sq_at_most(fermi_momentum(spec), spec.spacing)
    indices = ball_indices(spec.d, m, max_points)
    outer = int(np.max(np.sum(indices * indices, axis=1)))
    n_particles = len(indices)
    sea = FermiSea(
        spec=spec,
        indices=indices,
        norm_sq_max=outer,
        k_F=spec.spacing * math.sqrt(outer),
        N=n_particles,
        rho_eff=n_particles / spec.volume,
    )
    logger.debug(
        f"Fermi sea d={spec.d} L={spec.L:g}: N={sea.N}, k_F={sea.k_F:.6g}, "
        f"rho_eff={sea.rho_eff:.6g} (target {spec.rho:g})"
    )
    return sea


def annulus_count(spec: LatticeSpec, r_lo: float, r_hi: float) -> int:
    """
    Number of lattice momenta with r_lo <= |p| < r_hi.

    Args:
        spec: Lattice specification
        r_lo: Inner radius (inclusive)
        r_hi: Outer radius (exclusive)

    Returns:
        int: Exact count

    Raises:
        ConfigurationError: Unless 0 <= r_lo <= r_hi
    """
    if not (0.0 <= r_lo <= r_hi):
        raise ConfigurationError(f"Need 0 <= r_lo <= r_hi, got: {r_lo}, {r_hi}")
    upper = max_norm_sq_below(r_hi, spec.spacing)
    lower = max_norm_sq_below(r_lo, spec.spacing)
    return count_norm_sq_at_most(spec.d, upper) - count_norm_sq_at_most(spec.d, lower)
