#!/usr/bin/env python3
"""
Particle-Hole Basis
Truncated many-body basis of one total-momentum sector: a tracer momentum q
times the Fermi sea with at most P particle-hole pairs.

Every basis vector is the ordered product of creation operators over its
occupied orbitals, taken in ascending orbital ordinal, applied to the vacuum.
Orbitals are the lattice points with |p| <= k_F + Λ in (|n|², lexicographic)
order, so the sea occupies ordinals 0..N-1.
"""

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.config import MAX_BASIS_SIZE
from src.core.exceptions import ConfigurationError, ResourceLimitError
from src.lattice import FermiSea, ball_indices, max_norm_sq_at_most
from src.utils.file_manager import ensure_directory
from src.utils.logger import logger

MAX_PAIRS = 2

Index = Tuple[int, ...]


# ============================================================================
# DOMAIN TYPES
# ============================================================================

@dataclass(frozen=True)
class Truncation:
    """
    Truncation of the many-body space.

    Attributes:
        pairs: Largest number P of particle-hole pairs (0, 1 or 2)
        particle_cutoff: Λ; particles live in k_F < |p| <= k_F + Λ
        tracer_cutoff: Largest tracer recoil |q - K| from the sector momentum K
    """
    pairs: int = 2
    particle_cutoff: float = 1.0
    tracer_cutoff: float = 2.0

    def __post_init__(self):
        if int(self.pairs) != self.pairs or not 0 <= self.pairs <= MAX_PAIRS:
            raise ConfigurationError(f"pairs must be 0, 1 or 2, got: {self.pairs}")
        for name in ('particle_cutoff', 'tracer_cutoff'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ConfigurationError(f"{name} must be nonnegative and finite, got: {value}")


@dataclass(frozen=True)
class BasisState:
    """Tracer momentum index q with hole and particle orbital ordinals (both ascending)."""
    q: Index
    holes: Tuple[int, ...] = ()
    particles: Tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.holes) != len(self.particles):
            raise ConfigurationError(f"Unbalanced excitation: holes {self.holes}, particles {self.particles}")
        for name in ('holes', 'particles'):
            values = getattr(self, name)
            if any(b <= a for a, b in zip(values, values[1:])):
                raise ConfigurationError(f"{name} must be strictly ascending, got: {values}")

    @property
    def excitations(self) -> int:
        """Number of particle-hole pairs."""
        return len(self.holes)


# ============================================================================
# BASIS
# ============================================================================

class Basis:
    """
    Ordered basis of one sector with orbital and state lookups.

    States are ordered by excitation number, then particle ordinals, then
    tracer recoil, then hole ordinals; the unexcited state (K, ∅) is first.
    """

    def __init__(self, sea: FermiSea, truncation: Truncation, sector: Index,
                 orbitals: np.ndarray, window: np.ndarray, states: List[BasisState]):
        self.sea = sea
        self.truncation = truncation
        self.sector = sector
        self.orbitals = orbitals
        self.window = window
        self.states = states
        self.orbital_tuples: List[Index] = [tuple(int(c) for c in row) for row in orbitals]
        self.ordinal: Dict[Index, int] = {n: i for i, n in enumerate(self.orbital_tuples)}
        self.norm_sq = np.sum(orbitals * orbitals, axis=1).astype(np.int64)
        self.sea_norm_sq = int(np.sum(self.norm_sq[:sea.N]))
        self.index_of: Dict[BasisState, int] = {s: i for i, s in enumerate(states)}

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[BasisState]:
        return iter(self.states)

    def __getitem__(self, i: int) -> BasisState:
        return self.states[i]

    @property
    def d(self) -> int:
        return self.sea.d

    @property
    def N(self) -> int:
        return self.sea.N

    def occupied(self, state: BasisState) -> List[int]:
        """Ascending occupied orbital ordinals of a state."""
        holes = set(state.holes)
        return [k for k in range(self.N) if k not in holes] + list(state.particles)

    def total_momentum(self, state: BasisState) -> Index:
        """q + Σ(particles) - Σ(holes) as an index vector."""
        total = list(state.q)
        for p in state.particles:
            total = [a + b for a, b in zip(total, self.orbital_tuples[p])]
        for h in state.holes:
            total = [a - b for a, b in zip(total, self.orbital_tuples[h])]
        return tuple(total)

    def excitation_numbers(self) -> np.ndarray:
        return np.array([s.excitations for s in self.states], dtype=np.int64)

    def dump(self, path: Path) -> Path:
        """
        Write the basis as plain text, one state per line: ``index q holes particles``.

        Index vectors are written with ':' between components and lists with ','.
        """
        ensure_directory(Path(path).parent)

        def fmt(vector: Sequence[int]) -> str:
            return ':'.join(str(c) for c in vector)

        def fmt_list(ordinals: Sequence[int]) -> str:
            return ','.join(fmt(self.orbital_tuples[o]) for o in ordinals) or '-'

        lines = [f"# sector {fmt(self.sector)} size {len(self)}", "# index q holes particles"]
        for i, s in enumerate(self.states):
            lines.append(f"{i} {fmt(s.q)} {fmt_list(s.holes)} {fmt_list(s.particles)}")
        Path(path).write_text('\n'.join(lines) + '\n', encoding='utf-8')
        logger.debug(f"Basis dump written: {path}")
        return Path(path)


# ============================================================================
# ENUMERATION
# ============================================================================

def _orbitals(sea: FermiSea, particle_cutoff: float) -> np.ndarray:
    m = max_norm_sq_at_most(sea.k_F + particle_cutoff, sea.spec.spacing)
    # same ordering as the sea, which is therefore the leading block
    return ball_indices(sea.d, max(m, sea.norm_sq_max))


def _combinations_by_sum(tuples: List[Index], ordinals: range, size: int) -> Dict[Index, List[Tuple[int, ...]]]:
    by_sum: Dict[Index, List[Tuple[int, ...]]] = defaultdict(list)
    for combo in itertools.combinations(ordinals, size):
        total = tuple(sum(tuples[o][c] for o in combo) for c in range(len(tuples[0])))
        by_sum[total].append(combo)
    return by_sum


def build_basis(sea: FermiSea, truncation: Truncation, sector: Sequence[int],
                max_size: Optional[int] = None) -> Basis:
    """
    Enumerate every state of total momentum K within the truncation.

    Args:
        sea: Fermi sea of the gas
        truncation: Pair count, particle cutoff and tracer window
        sector: Total momentum index vector K
        max_size: Basis cap (default: FGT_BASIS_CAP)

    Returns:
        Basis: States in deterministic order, (K, ∅) first

    Raises:
        ConfigurationError: If the sector does not match the dimension
        ResourceLimitError: If the basis exceeds the cap
    """
    if max_size is None:
        max_size = MAX_BASIS_SIZE
    sector = tuple(int(c) for c in sector)
    if len(sector) != sea.d:
        raise ConfigurationError(f"Sector {sector} does not match dimension {sea.d}")

    h = sea.spec.spacing
    orbitals = _orbitals(sea, truncation.particle_cutoff)
    window = ball_indices(sea.d, max_norm_sq_at_most(truncation.tracer_cutoff, h))
    tuples = [tuple(int(c) for c in row) for row in orbitals]
    offsets = [tuple(int(c) for c in row) for row in window]
    outer = range(sea.N, len(orbitals))

    states = [BasisState(sector)]
    for n in range(1, truncation.pairs + 1):
        if len(outer) < n:
            break
        holes_by_sum = _combinations_by_sum(tuples, range(sea.N), n)
        for particles in itertools.combinations(outer, n):
            p_sum = [sum(tuples[o][c] for o in particles) for c in range(sea.d)]
            for w in offsets:
                # q = K + w requires Σ holes = Σ particles + w
                for holes in holes_by_sum.get(tuple(a + b for a, b in zip(p_sum, w)), ()):
                    states.append(BasisState(tuple(k + c for k, c in zip(sector, w)), holes, particles))
            if len(states) > max_size:
                raise ResourceLimitError(
                    f"Truncated basis of sector {sector} exceeds {max_size} states "
                    f"(P={truncation.pairs}, Λ={truncation.particle_cutoff:g})"
                )

    logger.debug(
        f"Basis sector {sector}: {len(states)} states, {len(orbitals)} orbitals "
        f"(N={sea.N}, {len(outer)} particle orbitals, {len(offsets)} tracer recoils)"
    )
    return Basis(sea, truncation, sector, orbitals, window, states)

