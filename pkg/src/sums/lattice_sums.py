#!/usr/bin/env python3
"""
Finite-Lattice Summation Engine
Exact sums over particle-hole pairs (k in the sea, l outside) on (2π/L)Z^d.

Two access paths are offered:

* transfer sums, for summands depending on Δ = p_l - p_k only, use the
  identity Σ_k Σ_l g(p_l - p_k) = Σ_Δ g(Δ)·#{k in sea : k + Δ not in sea};
  the counts come from an FFT autocorrelation of the sea indicator and are
  exact integers;
* pair blocks, for summands depending on |p_k| and |p_l| as well, stream
  every admissible pair in fixed-size chunks of near-surface sea points.
"""

import math
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np
from scipy import fft

from src.core.exceptions import NumericalError
from src.lattice import (
    FermiSea,
    ball_indices,
    max_norm_sq_at_most,
    max_norm_sq_below,
    unit_sphere_area,
)
from src.potential import FourierTable
from src.utils.logger import logger
from src.utils.parallel import chunk_ranges, deterministic_sum, parallel_map

# Upper bound on (sea chunk) x (transfer offsets) elements per pair block
_BLOCK_ELEMENTS = 2_000_000


@dataclass
class PairBlock:
    """A chunk of particle-hole pairs with everything kernels need."""
    k: np.ndarray        # (n, d) hole index vectors
    l: np.ndarray        # (n, d) particle index vectors
    nk2: np.ndarray      # |n_k|²
    nl2: np.ndarray      # |n_l|²
    dn2: np.ndarray      # |n_l - n_k|²
    spacing: float

    def __len__(self) -> int:
        return len(self.nk2)

    @property
    def delta(self) -> np.ndarray:
        """Physical transfers p_l - p_k."""
        return self.spacing * (self.l - self.k).astype(float)

    @property
    def gap(self) -> np.ndarray:
        """p_l² - p_k², exact up to one rounding (integer difference)."""
        return self.spacing ** 2 * (self.nl2 - self.nk2).astype(float)

    @property
    def modulus_gap(self) -> np.ndarray:
        """|p_l| - |p_k| in the factored form (n_l² - n_k²)/(|n_l| + |n_k|)."""
        diff = (self.nl2 - self.nk2).astype(float)
        return self.spacing * diff / (np.sqrt(self.nl2) + np.sqrt(self.nk2))

    @property
    def transfer(self) -> np.ndarray:
        """|p_l - p_k|."""
        return self.spacing * np.sqrt(self.dn2.astype(float))


def tail_remainder_bound(D: float, q: int, d: int, cutoff: float, prefactor: float) -> float:
    """
    Bound on prefactor·(2π)^{-d}∫_{|Δ|>cutoff} (D/(1+|Δ|)^8)^q dΔ.

    Uses s^{d-1} <= (1+s)^{d-1}; requires 8q > d.
    """
    if D == 0.0 or prefactor == 0.0:
        return 0.0
    exponent = 8 * q - d
    return (prefactor * unit_sphere_area(d) * D ** q * (1.0 + max(cutoff, 0.0)) ** (-exponent)
            / (exponent * (2.0 * math.pi) ** d))


class LatticeSumEngine:
    """Pair and transfer sums over one Fermi sea."""

    def __init__(self, sea: FermiSea, table: FourierTable, threads: int = 1):
        self.sea = sea
        self.table = table
        self.threads = threads
        self.d = sea.d
        self.h = sea.spec.spacing
        self.norm = sea.spec.volume ** -2
        self._overlap: Optional[np.ndarray] = None
        self._box = math.isqrt(sea.norm_sq_max)

    # ------------------------------------------------------------------------
    # Transfer sums
    # ------------------------------------------------------------------------

    def _overlap_counts(self) -> np.ndarray:
        """#{k in sea : k + Δ in sea} for all Δ, stored circularly."""
        if self._overlap is None:
            r = self._box
            size = fft.next_fast_len(4 * r + 1)
            indicator = np.zeros((size,) * self.d)
            idx = self.sea.indices + r
            indicator[tuple(idx.T)] = 1.0
            spectrum = fft.rfftn(indicator)
            corr = fft.irfftn(spectrum * np.conj(spectrum), s=indicator.shape)
            self._overlap = np.rint(corr).astype(np.int64)
        return self._overlap

    def crescent_counts(self, offsets: np.ndarray) -> np.ndarray:
        """
        #{k in sea : k + Δ outside the sea} for each transfer index vector.

        Args:
            offsets: (n, d) integer transfers

        Returns:
            np.ndarray: Integer counts
        """
        overlap = self._overlap_counts()
        size = overlap.shape[0]
        counts = np.full(len(offsets), self.sea.N, dtype=np.int64)
        inside = np.all(np.abs(offsets) <= 2 * self._box, axis=1)
        wrapped = np.mod(offsets[inside], size)
        counts[inside] -= overlap[tuple(wrapped.T)]
        return counts

    def transfer_sum(self, weight: Callable[[np.ndarray], np.ndarray],
                     lo_sq: int, hi_sq: int, crescent: bool = True) -> float:
        """
        Σ over transfers with lo_sq < |Δn|² <= hi_sq of weight(|Δ|)·count(Δ).

        Args:
            weight: Vectorized function of the physical transfer modulus
            lo_sq: Exclusive lower bound on |Δn|²  (use -1 to include Δ = 0)
            hi_sq: Inclusive upper bound on |Δn|²
            crescent: Multiply by crescent counts (pair sums) or by 1 (lattice sums)

        Returns:
            float: Unnormalized exactly rounded sum
        """
        if hi_sq <= lo_sq:
            return 0.0
        offsets = ball_indices(self.d, hi_sq)
        norm_sq = np.sum(offsets * offsets, axis=1)
        offsets, norm_sq = offsets[norm_sq > lo_sq], norm_sq[norm_sq > lo_sq]
        chunks = chunk_ranges(len(offsets), 65536)

        def partial(rng: range) -> np.ndarray:
            sl = slice(rng.start, rng.stop)
            moduli = self.h * np.sqrt(norm_sq[sl].astype(float))
            terms = weight(moduli, norm_sq[sl])
            if crescent:
                terms = terms * self.crescent_counts(offsets[sl])
            return terms

        parts = parallel_map(partial, chunks, self.threads)
        return deterministic_sum(np.concatenate(parts) if parts else np.zeros(0))

    def potential_power(self, q: int) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
        """weight(|Δ|, |Δn|²) = |F[v](Δ)|^q through the exact lattice cache."""
        def weight(moduli: np.ndarray, norm_sq: np.ndarray) -> np.ndarray:
            return np.abs(self.table.at_norm_sq(norm_sq, self.h, self.sea.L)) ** q
        return weight

    # ------------------------------------------------------------------------
    # Adaptive transfer truncation
    # ------------------------------------------------------------------------

    def truncated(self, piece: Callable[[int, int], float], remainder: Callable[[float], float],
                  lower: float, rtol: float, start: Optional[float] = None,
                  budget: Optional[float] = None,
                  norm: Optional[float] = None) -> Tuple[float, float, float]:
        """
        Grow the transfer cutoff Λ until the remainder bound falls below rtol·value.

        Args:
            piece: Unnormalized sum over lo_sq < |Δn|² <= hi_sq
            remainder: Normalized bound on the part beyond a physical cutoff
            lower: Physical lower end of the transfer range (exclusive bound below it)
            rtol: Target relative tolerance
            start: First cutoff (default: lower + 4·2π/R)
            budget: Largest admissible cutoff
            norm: Normalization of the pieces (default L^{-2d})

        Returns:
            Tuple[float, float, float]: (normalized value, remainder bound, cutoff)

        Raises:
            NumericalError: If the budget is exhausted first
        """
        step = 4.0 * 2.0 * math.pi / self.table.spec.R
        cutoff = lower + step if start is None else start
        if budget is None:
            budget = lower + 20.0 * 2.0 * math.pi / self.table.spec.R
        # transfers with |Δ| >= lower are in range, so the exclusive bound sits just below
        lo_sq = max_norm_sq_below(lower, self.h) if lower > 0.0 else -1
        scale = self.norm if norm is None else norm
        pieces: List[float] = []
        while True:
            hi_sq = max_norm_sq_at_most(cutoff, self.h)
            pieces.append(piece(lo_sq, hi_sq))
            lo_sq = max(lo_sq, hi_sq)
            value = scale * deterministic_sum(pieces)
            bound = remainder(max(0.0, cutoff - math.sqrt(self.d) * self.h))
            if bound <= rtol * abs(value) or bound == 0.0:
                logger.debug(f"Lattice truncation at cutoff {cutoff:.4g}: value={value:.6g}, bound={bound:.3g}")
                return value, bound, cutoff
            if cutoff >= budget:
                raise NumericalError(
                    f"Transfer truncation did not reach rtol={rtol:g} by cutoff {cutoff:.4g} "
                    f"(remainder bound {bound:.3e}, value {value:.6e})",
                    achieved=bound,
                )
            cutoff = min(budget, cutoff * 2.0)

    # ------------------------------------------------------------------------
    # Pair blocks
    # ------------------------------------------------------------------------

    def pair_blocks(self, max_transfer_sq: int, min_transfer_sq: int = 1) -> Iterator[PairBlock]:
        """
        Stream every pair k in sea, l outside, min <= |n_l - n_k|² <= max.

        Only sea points within the transfer range of the surface are visited.
        The block order is fixed, so reductions over blocks are reproducible.
        """
        offsets = ball_indices(self.d, max_transfer_sq)
        off_sq = np.sum(offsets * offsets, axis=1)
        offsets, off_sq = offsets[off_sq >= min_transfer_sq], off_sq[off_sq >= min_transfer_sq]
        if len(offsets) == 0:
            return
        sea = self.sea.indices
        sea_sq = np.sum(sea * sea, axis=1)
        reach = math.sqrt(max_transfer_sq)
        inner = max(0, math.floor(math.sqrt(self.sea.norm_sq_max) - reach))
        surface = sea[sea_sq >= inner * inner]
        per_chunk = max(1, _BLOCK_ELEMENTS // len(offsets))
        for rng in chunk_ranges(len(surface), per_chunk):
            k = surface[rng.start:rng.stop]
            l = k[:, None, :] + offsets[None, :, :]
            nl2 = np.sum(l * l, axis=2)
            outside = nl2 > self.sea.norm_sq_max
            if not np.any(outside):
                continue
            rows, cols = np.nonzero(outside)
            kk = k[rows]
            ll = l[rows, cols]
            yield PairBlock(
                k=kk,
                l=ll,
                nk2=np.sum(kk * kk, axis=1),
                nl2=nl2[rows, cols],
                dn2=off_sq[cols],
                spacing=self.h,
            )

    def pair_sum(self, kernel: Callable[[PairBlock], np.ndarray],
                 max_transfer_sq: int, min_transfer_sq: int = 1,
                 normalized: bool = True) -> float:
        """L^{-2d} Σ over pair blocks of kernel(block) (unnormalized on request)."""
        blocks = list(self.pair_blocks(max_transfer_sq, min_transfer_sq))
        parts = parallel_map(kernel, blocks, self.threads)
        scale = self.norm if normalized else 1.0
        return scale * deterministic_sum(np.concatenate(parts) if parts else np.zeros(0))
