#!/usr/bin/env python3
"""
Density Sweeps and Scaling Fits
Geometric ρ grids, least-squares power and logarithmic laws, and the
continuum sweeps behind every scaling claim.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import ConfigurationError, FitDomainError
from src.lattice import LatticeSpec, max_norm_sq_below
from src.potential import PotentialSpec
from src.sums import (
    PairBlock,
    SumSpec,
    SumValue,
    continuum_engine,
    convolution_sum,
    fluctuation_sum,
    large_tail_sum,
    lattice_engine,
    recollision_energy,
    shell_decomposition,
)
from src.utils.logger import logger
from src.utils.parallel import parallel_map

MIN_GRID_POINTS = 5
DEFAULT_RATIO = 10.0 ** 0.25

REPORT_QUANTITIES = ('fluctuation', 'V0', 'ere', 'tail', 'convolution', 'appendixB')

# Fluctuation exponents (d-1)/d
FLUCTUATION_TARGETS = {1: 0.0, 2: 0.5, 3: 2.0 / 3.0}

Sample = Tuple[float, float]


# ============================================================================
# DOMAIN TYPES
# ============================================================================

@dataclass(frozen=True)
class RhoGrid:
    """Strictly increasing positive densities ρ_1 < ... < ρ_m."""
    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, 'values', values)
        if len(values) < MIN_GRID_POINTS:
            raise ConfigurationError(f"A density grid needs at least {MIN_GRID_POINTS} points, got: {len(values)}")
        if not all(math.isfinite(v) and v > 0.0 for v in values):
            raise ConfigurationError(f"Densities must be positive and finite: {values}")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigurationError(f"Densities must be strictly increasing: {values}")

    @classmethod
    def geometric(cls, rho_min: float = 1e2, rho_max: float = 1e5,
                  points: Optional[int] = None) -> 'RhoGrid':
        """
        Geometric grid from rho_min to rho_max.

        Args:
            rho_min: First density
            rho_max: Last density
            points: Number of points (default: ratio 10^{1/4} between neighbours)

        Returns:
            RhoGrid: The grid
        """
        if not 0.0 < rho_min < rho_max:
            raise ConfigurationError(f"Need 0 < rho_min < rho_max, got: {rho_min}, {rho_max}")
        if points is None:
            points = int(round(math.log(rho_max / rho_min) / math.log(DEFAULT_RATIO))) + 1
        return cls(tuple(np.geomspace(rho_min, rho_max, points)))

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares line through (ln ρ, ln value) or (ln ρ, value)."""
    exponent: float             # slope
    stderr: float
    coefficient: float          # e^{intercept} (power law) or intercept (log law)
    r_squared: float
    residuals: Tuple[float, ...]
    law: str = 'power'
    samples: Tuple[Sample, ...] = field(default=(), repr=False)

    def predict(self, rho: float) -> float:
        if self.law == 'power':
            return self.coefficient * rho ** self.exponent
        return self.coefficient + self.exponent * math.log(rho)


# ============================================================================
# FITS
# ============================================================================

def _line_fit(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float, float, np.ndarray]:
    """Slope, intercept, slope standard error, R² and residuals of y ≈ a·x + b."""
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    ss_res = float(np.sum(residuals ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    sxx = float(np.sum((x - np.mean(x)) ** 2))
    dof = len(x) - 2
    stderr = math.sqrt(ss_res / dof / sxx) if dof > 0 and sxx > 0.0 else 0.0
    if ss_tot <= 1e-24 * max(1.0, float(np.sum(y ** 2))):
        # constant data are explained exactly by a flat line
        r_squared = 1.0
    else:
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return float(slope), float(intercept), stderr, r_squared, residuals


def _unpack(samples: Iterable[Sample]) -> Tuple[np.ndarray, np.ndarray]:
    pairs = [(float(r), float(v)) for r, v in samples]
    if len(pairs) < 3:
        raise ConfigurationError(f"A scaling fit needs at least 3 samples, got: {len(pairs)}")
    rho = np.array([p[0] for p in pairs])
    if np.any(rho <= 0.0):
        raise FitDomainError(f"Densities must be positive for a logarithmic fit: {rho.tolist()}")
    return rho, np.array([p[1] for p in pairs])


def fit_power_law(samples: Iterable[Sample]) -> ScalingFit:
    """
    Fit value ≈ C·ρ^α by least squares in log-log coordinates.

    Args:
        samples: At least 3 (ρ, value) pairs with value > 0

    Returns:
        ScalingFit: Exponent α, its standard error, C and R²

    Raises:
        FitDomainError: If a value is not positive
    """
    samples = list(samples)
    rho, values = _unpack(samples)
    if np.any(values <= 0.0):
        raise FitDomainError(f"Power-law fit needs positive values, got: {values.tolist()}")
    slope, intercept, stderr, r2, residuals = _line_fit(np.log(rho), np.log(values))
    return ScalingFit(slope, stderr, math.exp(intercept), r2, tuple(residuals.tolist()),
                      'power', tuple(samples))


def fit_log_law(samples: Iterable[Sample]) -> ScalingFit:
    """
    Fit value ≈ a + s·ln ρ by least squares; ``exponent`` holds the slope s.

    Raises:
        FitDomainError: If a density is not positive
    """
    samples = list(samples)
    rho, values = _unpack(samples)
    slope, intercept, stderr, r2, residuals = _line_fit(np.log(rho), values)
    return ScalingFit(slope, stderr, intercept, r2, tuple(residuals.tolist()), 'log', tuple(samples))


# ============================================================================
# SWEEPS
# ============================================================================

def continuum_spec(d: int, rho: float, potential: Optional[PotentialSpec] = None,
                   **kwargs) -> SumSpec:
    """Continuum SumSpec at density ρ (the box side is irrelevant there)."""
    return SumSpec(lattice=LatticeSpec(d, 1.0, rho), potential=potential or PotentialSpec(),
                   mode='continuum', **kwargs)


def evaluate_quantity(spec: SumSpec, quantity: str) -> SumValue:
    """
    One report quantity at one spec.

    Args:
        spec: Sum specification
        quantity: One of REPORT_QUANTITIES

    Returns:
        SumValue: Value with its error estimate
    """
    if quantity == 'fluctuation':
        return fluctuation_sum(spec)
    if quantity == 'V0':
        return SumValue(shell_decomposition(spec, keep_pairs=False).counts[0])
    if quantity == 'ere':
        return recollision_energy(spec)
    if quantity == 'tail':
        return large_tail_sum(spec)
    if quantity == 'convolution':
        return convolution_sum(spec)
    if quantity == 'appendixB':
        return appendix_b_value(spec)
    raise ConfigurationError(f"Unknown report quantity: {quantity} (expected one of {REPORT_QUANTITIES})")


def sweep(d: int, quantity: str, grid: RhoGrid, threads: int = 1, **spec_kwargs) -> List[Sample]:
    """
    Evaluate a quantity in continuum mode at every grid density.

    Grid points run in parallel; the order of the returned samples is the grid order.
    """
    def point(rho: float) -> Sample:
        return rho, float(evaluate_quantity(continuum_spec(d, rho, **spec_kwargs), quantity))

    logger.info(f"Sweep of {quantity} in d={d} over {len(grid)} densities "
                f"[{grid.values[0]:g}, {grid.values[-1]:g}]")
    return parallel_map(point, list(grid.values), threads)


def dimension_scaling_report(d: int, quantity: str, grid: RhoGrid, threads: int = 1,
                             **spec_kwargs) -> ScalingFit:
    """
    Continuum sweep of one quantity followed by a power-law fit.

    Args:
        d: Dimension
        quantity: One of REPORT_QUANTITIES
        grid: Density grid
        threads: Parallel grid points
        **spec_kwargs: SumSpec fields (eps, q, potential, ...)

    Returns:
        ScalingFit: Fitted power law; for 'fluctuation' with q=2 the
        expected exponent is (d-1)/d

    Raises:
        NumericalError: Propagated from the sums
    """
    if quantity not in REPORT_QUANTITIES:
        raise ConfigurationError(f"Unknown report quantity: {quantity} (expected one of {REPORT_QUANTITIES})")
    samples = sweep(d, quantity, grid, threads, **spec_kwargs)
    fit = fit_power_law(samples)
    logger.info(f"{quantity} d={d}: exponent {fit.exponent:.4f} ± {fit.stderr:.2g} (R²={fit.r_squared:.5f})")
    return fit


# ============================================================================
# LOGARITHMIC DIVERGENCE IN THREE DIMENSIONS
# ============================================================================

def appendix_b_value(spec: SumSpec) -> SumValue:
    """
    Σ_{n=1}^{M} over pairs of shell n of (E_l - E_k)^{-2}.

    Shells n >= 1 tile the window ρ^{-b_1} <= |p_l| - |p_k| < ρ^ε of
    small-transfer pairs, so the sum is one windowed pair sum.

    Args:
        spec: Sum specification (b sets the first shell edge)

    Returns:
        SumValue: The shell sum (0 when the window is empty)
    """
    edges = spec.shell_edges()
    lo, cut = edges[1], spec.transfer_cut
    if lo >= cut:
        return SumValue(0.0)
    if spec.mode == 'lattice':
        engine = lattice_engine(spec)

        def kernel(block: PairBlock) -> np.ndarray:
            inside = (block.modulus_gap >= lo) & (block.modulus_gap < cut)
            return np.where(inside, 1.0 / block.gap ** 2, 0.0)

        return SumValue(engine.pair_sum(kernel, max_norm_sq_below(cut, engine.h)))
    engine = continuum_engine(spec)
    value, error = engine.pair_integral(lambda _: 1.0, lambda w: w ** -2, 0.0, cut, lo=lo, hi=cut)
    return SumValue(value, error)


def appendix_b_sum(grid: RhoGrid, eps: float, M: Optional[int] = None, b: float = 0.5,
                   threads: int = 1, potential: Optional[PotentialSpec] = None) -> List[Sample]:
    """
    The three-dimensional shell sum over a density grid (continuum mode).

    Args:
        grid: Density grid
        eps: Transfer cut exponent
        M: Shell count (default ⌊ln ρ⌋ per density)
        b: First shell exponent of the generalized schedule
        threads: Parallel grid points
        potential: Potential (does not enter the sum)

    Returns:
        List[Sample]: (ρ, value) in grid order
    """
    return sweep(3, 'appendixB', grid, threads, eps=eps, M=M, b=b, potential=potential)


def appendix_b_scan(grid: RhoGrid, eps: float, M: Optional[int] = None,
                    b_values: Sequence[float] = (0.25, 0.5, 0.75),
                    threads: int = 1) -> Dict[float, List[Sample]]:
    """
    The three-dimensional shell sum for several first-shell exponents b.

    A larger b moves the first edge ρ^{-b} down and widens the window, so at
    every density the sum is nondecreasing in b.

    Args:
        grid: Density grid
        eps: Transfer cut exponent
        M: Shell count (default ⌊ln ρ⌋ per density)
        b_values: First shell exponents, each in (0, 1)
        threads: Parallel grid points

    Returns:
        Dict[float, List[Sample]]: Samples per b, in the order of b_values
    """
    scan = {}
    for b in b_values:
        scan[b] = appendix_b_sum(grid, eps, M, b, threads)
        fit = fit_log_law(scan[b])
        logger.info(f"Shell sum scan b={b:g}: log slope {fit.exponent:.4g} (R²={fit.r_squared:.4f})")
    return scan
