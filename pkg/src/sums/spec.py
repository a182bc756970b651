#!/usr/bin/env python3
"""
Sum Specifications
Parameters shared by every Fermi-sea sum and the shell schedule b_n.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.config import TAIL_RTOL
from src.core.exceptions import ConfigurationError
from src.lattice import LatticeSpec
from src.potential import PotentialSpec

MODES = ('lattice', 'continuum')


def default_shell_count(rho: float) -> int:
    """M = ⌊ln ρ⌋, at least 1."""
    return max(1, int(math.floor(math.log(rho))))


def shell_exponents(eps: float, M: int, b: float = 0.5) -> List[float]:
    """
    Exponents b_0 = ∞, b_n = b - (n-1)(b+ε)/M for n = 1..M+1.

    b = 1/2 gives the two-dimensional schedule with 2c = 1/(1/2+ε); the last
    entry b_{M+1} = -ε closes the final shell at the transfer window ρ^ε.

    Args:
        eps: Transfer cut exponent in (0, 1/2)
        M: Number of shells (>= 1)
        b: Exponent of the first shell edge

    Returns:
        List[float]: M + 2 exponents
    """
    if M < 1:
        raise ConfigurationError(f"M must be >= 1, got: {M}")
    return [math.inf] + [b - (n - 1) * (b + eps) / M for n in range(1, M + 2)]


@dataclass(frozen=True)
class SumSpec:
    """Everything a Fermi-sea sum needs besides the quantity selector."""
    lattice: LatticeSpec
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    eps: float = 0.1
    M: Optional[int] = None
    q: int = 2
    tail_rtol: float = TAIL_RTOL
    mode: str = 'continuum'
    b: float = 0.5
    threads: int = 1

    def __post_init__(self):
        if not 0.0 < self.eps < 0.5:
            raise ConfigurationError(f"eps must lie in (0, 1/2), got: {self.eps}")
        if self.M is not None and self.M < 1:
            raise ConfigurationError(f"M must be >= 1, got: {self.M}")
        if int(self.q) != self.q or self.q < 1:
            raise ConfigurationError(f"q must be a positive integer, got: {self.q}")
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got: {self.mode}")
        if not self.tail_rtol > 0.0:
            raise ConfigurationError(f"tail_rtol must be positive, got: {self.tail_rtol}")
        if not 0.0 < self.b <= 1.0:
            raise ConfigurationError(f"b must lie in (0, 1], got: {self.b}")
        if self.mode == 'lattice':
            self.potential.check_fits(self.lattice.L)

    @property
    def d(self) -> int:
        return self.lattice.d

    @property
    def rho(self) -> float:
        return self.lattice.rho

    @property
    def shells(self) -> int:
        """Effective M (⌊ln ρ⌋ when unset)."""
        return self.M if self.M is not None else default_shell_count(self.rho)

    @property
    def transfer_cut(self) -> float:
        """ρ^ε."""
        return self.rho ** self.eps

    def shell_edges(self) -> List[float]:
        """Gap thresholds ρ^{-b_n} for n = 0..M+1 (the first is 0)."""
        return [0.0 if math.isinf(bn) else self.rho ** (-bn)
                for bn in shell_exponents(self.eps, self.shells, self.b)]


@dataclass
class ShellDecomposition:
    """
    Partition of small-transfer particle-hole pairs by |p_l| - |p_k|.

    ``counts[n]`` is V_n = L^{-2d}·#S_n in lattice mode and the continuum
    measure in continuum mode. ``pairs[n]`` holds (k index, l index) arrays
    in lattice mode.
    """
    exponents: List[float]
    edges: List[float]
    two_c: float
    counts: np.ndarray
    mode: str
    total: float
    pairs: Optional[List[np.ndarray]] = None

    @property
    def M(self) -> int:
        return len(self.counts) - 1

    def iter_pairs(self, n: int):
        """Yield (k index vector, l index vector) for every pair of shell n."""
        if self.pairs is None:
            raise ConfigurationError("Pair lists exist only in lattice mode")
        for row in self.pairs[n]:
            half = len(row) // 2
            yield tuple(int(c) for c in row[:half]), tuple(int(c) for c in row[half:])
