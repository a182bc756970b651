#!/usr/bin/env python3
"""
Thermodynamic-Limit Integration Engine
Continuum counterparts of the lattice sums,
(2π)^{-2d} ∫_{|k|<=k_F} ∫_{|l|>k_F} g(k, l) dk dl.

The pair integral is parametrized by the transfer Δ = l - k (modulus D),
the coordinate x = k·Δ/D along it, and the transverse part of k, which is
integrated analytically: for fixed (D, x) the gap ω = l² - k² = 2xD + D² is
fixed and every window on |l| - |k| = ω/(|l| + |k|) becomes an interval of
|k|. Only the (D, x) integrals are done numerically, with adaptive
Gauss–Kronrod quadrature split at every kink of the transverse measure.
"""

import math
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy import integrate

from src.core.exceptions import NumericalError
from src.lattice import LatticeSpec, fermi_momentum, unit_ball_volume, unit_sphere_area
from src.potential import FourierTable
from src.utils.logger import logger

# Default relative tolerance of the nested quadratures
CONTINUUM_RTOL = 1e-9
_QUAD_LIMIT = 400


def slice_measure(x: Union[float, np.ndarray], D: float, k_F: float, d: int,
                  lo: float = 0.0, hi: float = math.inf) -> Union[float, np.ndarray]:
    """
    Transverse measure of {k : k·Δ̂ = x, |k| <= k_F < |k + Δ|, lo <= |k+Δ| - |k| < hi}.

    Squared radii are carried as distances below k_F² so that thin slices
    near the Fermi surface keep full relative accuracy.

    Args:
        x: Coordinate(s) of k along the transfer
        D: Transfer modulus |Δ|
        k_F: Fermi momentum
        d: Dimension
        lo: Lower edge of the |l| - |k| window (0 for none)
        hi: Upper edge of the window (inf for none)

    Returns:
        Length (d=2), area (d=3) or indicator (d=1); a float for scalar x
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    kf2 = k_F * k_F
    omega = 2.0 * x * D + D * D
    positive = omega > 0.0
    omega = np.where(positive, omega, 1.0)
    ax = np.abs(x)

    # |l| > k_F  <=>  |k|² > k_F² - ω
    k_lo = np.sqrt(np.maximum(0.0, kf2 - omega))
    depth_lo = np.minimum(omega, kf2)
    ax_depth = (k_F - ax) * (k_F + ax)
    if hi < math.inf:
        # |l| - |k| < hi  <=>  |k| > (ω/hi - hi)/2
        edge = 0.5 * (omega / hi - hi)
        wider = edge > k_lo
        k_lo = np.where(wider, edge, k_lo)
        depth_lo = np.where(wider, (k_F - edge) * (k_F + edge), depth_lo)
    strict_lo = k_lo
    use_ax = ax > k_lo
    k_lo = np.where(use_ax, ax, k_lo)
    depth_lo = np.where(use_ax, ax_depth, depth_lo)

    k_hi = np.full_like(x, k_F)
    depth_hi = np.zeros_like(x)
    if lo > 0.0:
        # |l| - |k| >= lo  <=>  |k| <= (ω/lo - lo)/2
        edge = 0.5 * (omega / lo - lo)
        narrower = edge < k_F
        k_hi = np.where(narrower, edge, k_hi)
        depth_hi = np.where(narrower, (k_F - edge) * (k_F + edge), depth_hi)

    if d == 1:
        # no transverse directions: |k| = |x| itself must lie in the window
        measure = ((ax > strict_lo) & (ax <= k_hi)).astype(float)
    else:
        width = depth_lo - depth_hi
        open_ = (k_hi > k_lo) & (width > 0.0)
        if d == 2:
            denom = (np.sqrt(np.maximum(k_hi * k_hi - x * x, 0.0))
                     + np.sqrt(np.maximum(k_lo * k_lo - x * x, 0.0)))
            measure = np.where(open_, 2.0 * width / np.where(denom > 0.0, denom, 1.0), 0.0)
        else:
            measure = np.where(open_, math.pi * width, 0.0)
    measure = np.where(positive, measure, 0.0)
    return float(measure[0]) if scalar else measure


def slice_breakpoints(D: float, k_F: float, lo: float, hi: float) -> List[float]:
    """Coordinates x in (-D/2, k_F) where ``slice_measure`` has a kink or jump."""
    omegas = [k_F * k_F]
    xs = [k_F - D, 0.0]
    for c in (lo, hi):
        if 0.0 < c < math.inf:
            omegas += [2.0 * c * k_F - c * c, c * (2.0 * k_F + c)]
            xs.append(0.5 * (c - D))
    xs += [(w - D * D) / (2.0 * D) for w in omegas]
    return sorted({x for x in xs if -0.5 * D < x < k_F})


class ContinuumEngine:
    """Continuum pair and transfer integrals at density ρ in dimension d."""

    def __init__(self, d: int, rho: float, table: FourierTable,
                 rtol: float = CONTINUUM_RTOL):
        self.d = d
        self.rho = rho
        self.table = table
        self.rtol = rtol
        self.k_F = fermi_momentum(LatticeSpec(d, 1.0, rho))
        self.norm = (2.0 * math.pi) ** (-2 * d)

    # ------------------------------------------------------------------------
    # Potential profile
    # ------------------------------------------------------------------------

    def magnitude(self, q: int = 1) -> Callable[[float], float]:
        """D ↦ |F[v](D)|^q through the table's floating cache."""
        def weight(D: float) -> float:
            return abs(self.table.transform(D)) ** q
        return weight

    # ------------------------------------------------------------------------
    # Transfer integrals
    # ------------------------------------------------------------------------

    def crescent_volume(self, D: float) -> float:
        """Volume of {k : |k| <= k_F < |k + Δ|} for |Δ| = D."""
        k = self.k_F
        if D >= 2.0 * k:
            return unit_ball_volume(self.d) * k ** self.d
        if self.d == 1:
            return D
        if self.d == 2:
            lens = 2.0 * k * k * math.acos(D / (2.0 * k)) - 0.5 * D * math.sqrt(4.0 * k * k - D * D)
            return math.pi * k * k - lens
        return math.pi * k * k * D - math.pi * D ** 3 / 12.0

    def _quad(self, f: Callable[[float], float], a: float, b: float,
              points: Optional[List[float]] = None,
              rtol: Optional[float] = None) -> Tuple[float, float]:
        if b <= a:
            return 0.0, 0.0
        inner = [p for p in (points or []) if a < p < b]
        value, error = integrate.quad(
            f, a, b, points=inner or None, limit=_QUAD_LIMIT,
            epsabs=1e-300, epsrel=self.rtol if rtol is None else rtol,
        )
        return value, error

    def transfer_integral(self, weight: Callable[[float], float], lo: float, hi: float,
                          crescent: bool = True) -> Tuple[float, float]:
        """
        ∫_{lo <= |Δ| < hi} weight(|Δ|)·crescent(|Δ|) dΔ, normalized by (2π)^{-2d}
        (or by (2π)^{-d} without the crescent factor).

        Returns:
            Tuple[float, float]: (value, quadrature error estimate)
        """
        area = unit_sphere_area(self.d)
        if crescent:
            def f(D: float) -> float:
                return area * D ** (self.d - 1) * weight(D) * self.crescent_volume(D)
            scale = self.norm
        else:
            def f(D: float) -> float:
                return area * D ** (self.d - 1) * weight(D)
            scale = (2.0 * math.pi) ** (-self.d)
        value, error = self._quad(f, lo, hi, [2.0 * self.k_F])
        return scale * value, scale * error

    # ------------------------------------------------------------------------
    # Pair integrals
    # ------------------------------------------------------------------------

    def slice_integral(self, D: float, kernel: Callable[[float], float],
                       lo: float = 0.0, hi: float = math.inf) -> float:
        """∫ dx slice_measure(x)·kernel(ω(x)) at fixed transfer modulus D."""
        k_F, d = self.k_F, self.d

        def f(x: float) -> float:
            m = slice_measure(x, D, k_F, d, lo, hi)
            return m * kernel(2.0 * x * D + D * D) if m else 0.0

        # inner rule one decade tighter than the outer one
        value, _ = self._quad(f, -0.5 * D, k_F, slice_breakpoints(D, k_F, lo, hi), 0.1 * self.rtol)
        return value

    def pair_integral(self, weight: Callable[[float], float], kernel: Callable[[float], float],
                      D_lo: float, D_hi: float, lo: float = 0.0,
                      hi: float = math.inf) -> Tuple[float, float]:
        """
        (2π)^{-2d} ∫ dk ∫ dl weight(|Δ|)·kernel(ω) over pairs with
        D_lo <= |Δ| < D_hi and lo <= |l| - |k| < hi.

        Returns:
            Tuple[float, float]: (value, outer quadrature error estimate)
        """
        area = unit_sphere_area(self.d)
        # |l| - |k| <= |Δ|, so transfers below the window's lower edge contribute nothing
        start = max(D_lo, lo)

        def f(D: float) -> float:
            w = weight(D)
            if w == 0.0:
                return 0.0
            return area * D ** (self.d - 1) * w * self.slice_integral(D, kernel, lo, hi)

        points = [2.0 * self.k_F] + [c for c in (lo, hi) if math.isfinite(c)]
        value, error = self._quad(f, start, D_hi, points)
        return self.norm * value, self.norm * error

    # ------------------------------------------------------------------------
    # Adaptive truncation
    # ------------------------------------------------------------------------

    def truncated(self, integral: Callable[[float, float], Tuple[float, float]],
                  remainder: Callable[[float], float], lower: float, rtol: float,
                  budget: Optional[float] = None) -> Tuple[float, float, float]:
        """
        Extend the upper transfer limit until the remainder bound is below rtol·value.

        Args:
            integral: Normalized integral over [a, b) returning (value, error)
            remainder: Bound on everything beyond a cutoff
            lower: Lower transfer limit
            rtol: Target relative tolerance
            budget: Largest admissible cutoff

        Returns:
            Tuple[float, float, float]: (value, remainder bound + quadrature error, cutoff)

        Raises:
            NumericalError: If the budget is exhausted first
        """
        step = 4.0 * 2.0 * math.pi / self.table.spec.R
        if budget is None:
            budget = lower + 20.0 * 2.0 * math.pi / self.table.spec.R
        a, cutoff = lower, lower + step
        values: List[float] = []
        errors: List[float] = []
        while True:
            value, error = integral(a, cutoff)
            values.append(value)
            errors.append(error)
            total = math.fsum(values)
            bound = remainder(cutoff)
            if bound <= rtol * abs(total) or bound == 0.0:
                logger.debug(f"Continuum truncation at cutoff {cutoff:.4g}: value={total:.6g}, bound={bound:.3g}")
                return total, bound + math.fsum(errors), cutoff
            if cutoff >= budget:
                raise NumericalError(
                    f"Continuum truncation did not reach rtol={rtol:g} by cutoff {cutoff:.4g} "
                    f"(remainder bound {bound:.3e}, value {total:.6e})",
                    achieved=bound,
                )
            a, cutoff = cutoff, min(budget, 2.0 * cutoff)
