#!/usr/bin/env python3
"""
First-Order Mean-Field Deviation
Exact momentum-space evaluation of

    L^{-2d} Σ_{(k,l)} |F[v](p_k - p_l)|² Σ_q |φ̂(q)|² |∫_0^t e^{iΩ_q τ} dτ|²,

its stationary/nonstationary split, and the measure of the energy-conserving
particle-hole region reachable by a tracer of momentum P_0.

There is no time stepping: every time integral is closed form per tracer mode.
"""

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Tuple, Union

import numpy as np
from scipy import integrate

from src.core.exceptions import ConfigurationError
from src.lattice import Momentum, ball_indices, fermi_momentum, max_norm_sq_below
from src.sums import (
    DECAY_ORDER,
    PairBlock,
    SumSpec,
    SumValue,
    continuum_engine,
    fourier_table,
    lattice_engine,
    slice_breakpoints,
    slice_measure,
    tail_remainder_bound,
)
from src.utils.logger import logger
from src.utils.parallel import chunk_ranges, deterministic_sum

from .tracer import PhaseKernel, TracerState, kick_derivative_bound, oscillatory_weight

# Relative tolerance of the transfer truncation for unrestricted deviations
DEVIATION_RTOL = 1e-6

# Tracer modes lighter than this fraction of the heaviest one are dropped
MODE_RTOL = 1e-16

_GL_ORDER = 8
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)
_ANGLES_2D = 32
_POLAR_3D, _AZIMUTH_3D = 12, 24
_MAX_X_PANELS = 4096
_ROW_CHUNK = 8192

_BUDGET_PERIODS = 20.0


# ============================================================================
# RESTRICTIONS
# ============================================================================

@dataclass(frozen=True)
class Restriction:
    """
    Which particle-hole pairs enter a deviation.

    ``kind`` is 'all', 'small' (|Δ| < ρ^ε), 'large' (|Δ| >= ρ^ε) or 'shell'
    (small transfers with ρ^{-b_n} <= |p_l| - |p_k| < ρ^{-b_{n+1}}); ``gap_lo``
    and ``gap_hi`` narrow the |p_l| - |p_k| window further.
    """
    kind: str = 'all'
    shell: Optional[int] = None
    gap_lo: float = 0.0
    gap_hi: float = math.inf

    @classmethod
    def parse(cls, text: str) -> 'Restriction':
        """'all', 'small', 'large' or 'shell:<n>'."""
        if text in ('all', 'small', 'large'):
            return cls(text)
        if text.startswith('shell:'):
            try:
                return cls('shell', int(text.split(':', 1)[1]))
            except ValueError:
                pass
        raise ConfigurationError(f"Unknown restriction: {text!r} (expected all, small, large or shell:<n>)")

    @property
    def label(self) -> str:
        return f'shell:{self.shell}' if self.kind == 'shell' else self.kind

    def window(self, spec: SumSpec) -> Tuple[float, float]:
        """The |p_l| - |p_k| window [lo, hi) of this restriction."""
        lo, hi = self.gap_lo, self.gap_hi
        if self.kind == 'shell':
            edges = spec.shell_edges()
            if self.shell is None or not 0 <= self.shell <= spec.shells:
                raise ConfigurationError(f"Shell index must lie in 0..{spec.shells}, got: {self.shell}")
            lo, hi = max(lo, edges[self.shell]), min(hi, edges[self.shell + 1])
        return lo, hi

    def transfers(self, spec: SumSpec) -> Tuple[float, Optional[float]]:
        """Transfer range [lower, upper); upper None means truncated adaptively."""
        if self.kind in ('small', 'shell'):
            return 0.0, spec.transfer_cut
        if self.kind == 'large':
            return spec.transfer_cut, None
        return 0.0, None


# ============================================================================
# LATTICE EVALUATION
# ============================================================================

def _row_weights(block: PairBlock, rows: slice, q: np.ndarray, w: np.ndarray,
                 t: float) -> Tuple[np.ndarray, np.ndarray]:
    """Σ_q w_q |I(Ω_q, t)|² and the kick-derivative norm for a slice of pairs."""
    phases = PhaseKernel(block.delta[rows], block.gap[rows])
    rates = phases.recoil(q)
    return oscillatory_weight(phases.frequencies(q), t) @ w, np.sqrt((rates * rates) @ w)


def _lattice_kernel(spec: SumSpec, state: TracerState, t: float, lo: float, hi: float,
                    mode: str = 'exact') -> Callable[[PairBlock], np.ndarray]:
    """
    Per-pair summand restricted to lo <= |p_l| - |p_k| < hi.

    ``mode`` is 'exact' (the deviation), 'bound' (|F|²(2 + tK)²/ω²) or
    'weight' (|F|² alone).
    """
    engine = lattice_engine(spec)
    q, w = state.significant(MODE_RTOL)

    def kernel(block: PairBlock) -> np.ndarray:
        F2 = np.abs(engine.table.at_norm_sq(block.dn2, block.spacing, engine.sea.L)) ** 2
        gap = block.modulus_gap
        inside = (gap >= lo) & (gap < hi)
        out = np.zeros(len(block))
        if mode == 'weight':
            return np.where(inside, F2, 0.0)
        for rng in chunk_ranges(len(block), _ROW_CHUNK):
            rows = slice(rng.start, rng.stop)
            exact, rate_norm = _row_weights(block, rows, q, w, t)
            if mode == 'exact':
                out[rows] = exact
            else:
                out[rows] = (2.0 + t * rate_norm) ** 2 / block.gap[rows] ** 2
        return np.where(inside, F2 * out, 0.0)

    return kernel


def _lattice_value(spec: SumSpec, restriction: Restriction, kernel: Callable[[PairBlock], np.ndarray],
                   remainder_scale: float) -> SumValue:
    engine = lattice_engine(spec)
    lower, upper = restriction.transfers(spec)
    if upper is not None:
        return SumValue(engine.pair_sum(kernel, max_norm_sq_below(upper, engine.h)))
    budget = lower + _BUDGET_PERIODS * 2.0 * math.pi / spec.potential.R
    D = fourier_table(spec.potential, spec.d).decay_audit(DECAY_ORDER, p_max=budget).D
    value, bound, _ = engine.truncated(
        lambda lo_sq, hi_sq: engine.pair_sum(kernel, hi_sq, lo_sq + 1, normalized=False),
        lambda c: remainder_scale * tail_remainder_bound(D, 2, spec.d, c, engine.sea.rho_eff),
        lower, DEVIATION_RTOL, budget=budget,
    )
    return SumValue(value, bound)


# ============================================================================
# CONTINUUM EVALUATION
# ============================================================================

def _direction_rule(d: int) -> Tuple[np.ndarray, np.ndarray]:
    """Unit vectors and weights integrating over S^{d-1} (weights sum to its area)."""
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        phi = 2.0 * math.pi * np.arange(_ANGLES_2D) / _ANGLES_2D
        return np.stack([np.cos(phi), np.sin(phi)], axis=1), np.full(_ANGLES_2D, 2.0 * math.pi / _ANGLES_2D)
    cos_t, w_t = np.polynomial.legendre.leggauss(_POLAR_3D)
    phi = 2.0 * math.pi * np.arange(_AZIMUTH_3D) / _AZIMUTH_3D
    sin_t = np.sqrt(1.0 - cos_t ** 2)
    dirs = np.stack([
        np.outer(sin_t, np.cos(phi)).ravel(),
        np.outer(sin_t, np.sin(phi)).ravel(),
        np.repeat(cos_t, _AZIMUTH_3D),
    ], axis=1)
    return dirs, np.repeat(w_t, _AZIMUTH_3D) * (2.0 * math.pi / _AZIMUTH_3D)


def _composite_nodes(edges: np.ndarray, width: float, max_panels: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre nodes on each interval of ``edges``, panels no wider than ``width``."""
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        panels = min(max_panels, max(1, int(math.ceil((b - a) / width))))
        cuts = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(cuts)
        mid = 0.5 * (cuts[1:] + cuts[:-1])
        nodes.append((mid[:, None] + half[:, None] * _GL_NODES).ravel())
        weights.append((half[:, None] * _GL_WEIGHTS).ravel())
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(nodes), np.concatenate(weights)


def _continuum_deviation(spec: SumSpec, state: TracerState, t: float, D_lo: float, D_hi: float,
                         lo: float, hi: float) -> float:
    """
    (2π)^{-2d} ∫ dΔ |F(Δ)|² ∫ dk Σ_q w_q |I(Ω_q, t)|² over D_lo <= |Δ| < D_hi and the gap window.

    With x = k·Δ̂ the tracer frequency is Ω_q = 2xD + 2D² + 2D q·Δ̂, so the
    transverse part of k still integrates in closed form; x, |Δ| and the
    direction Δ̂ use composite Gauss rules fine enough to resolve the
    oscillation period π/(Dt).
    """
    engine = continuum_engine(spec)
    k_F, d = engine.k_F, spec.d
    start = max(D_lo, lo)
    if D_hi <= start or t == 0.0:
        return 0.0
    q, w = state.significant(MODE_RTOL)
    directions, dir_weights = _direction_rule(d)
    projections = q @ directions.T                    # (modes, directions)
    marks = [start, D_hi] + [c for c in (2.0 * k_F, lo, hi) if start < c < D_hi]
    D_nodes, D_weights = _composite_nodes(np.array(sorted(marks)), 0.25 * math.pi / spec.potential.R, 4096)
    magnitude = engine.magnitude(2)
    terms = []
    for D, wD in zip(D_nodes, D_weights):
        F2 = magnitude(D)
        if F2 == 0.0:
            continue
        cuts = np.array([-0.5 * D] + slice_breakpoints(D, k_F, lo, hi) + [k_F])
        x, wx = _composite_nodes(cuts, min(0.5 / (D * t), (k_F + D) / 32.0), _MAX_X_PANELS)
        measure = slice_measure(x, D, k_F, d, lo, hi)
        keep = measure > 0.0
        x, wx = x[keep], wx[keep] * measure[keep]
        inner = 0.0
        for rng in chunk_ranges(len(x), _ROW_CHUNK):
            rows = slice(rng.start, rng.stop)
            base = 2.0 * D * x[rows] + 2.0 * D * D
            for j in range(len(dir_weights)):
                omega = base[:, None] + 2.0 * D * projections[None, :, j]
                inner += dir_weights[j] * float(wx[rows] @ (oscillatory_weight(omega, t) @ w))
        terms.append(wD * D ** (d - 1) * F2 * inner)
    return engine.norm * deterministic_sum(terms)


def _continuum_value(spec: SumSpec, state: TracerState, t: float, restriction: Restriction) -> SumValue:
    lo, hi = restriction.window(spec)
    lower, upper = restriction.transfers(spec)
    if upper is not None:
        return SumValue(_continuum_deviation(spec, state, t, lower, upper, lo, hi))
    engine = continuum_engine(spec)
    budget = lower + _BUDGET_PERIODS * 2.0 * math.pi / spec.potential.R
    D = fourier_table(spec.potential, spec.d).decay_audit(DECAY_ORDER, p_max=budget).D
    value, bound, _ = engine.truncated(
        lambda a, b: (_continuum_deviation(spec, state, t, a, b, lo, hi), 0.0),
        lambda c: t * t * tail_remainder_bound(D, 2, spec.d, c, spec.rho),
        lower, DEVIATION_RTOL, budget=budget,
    )
    return SumValue(value, bound)


# ============================================================================
# OPERATIONS
# ============================================================================

def first_order_deviation(spec: SumSpec, state: TracerState, t: float,
                          restriction: Union[str, Restriction] = 'all') -> SumValue:
    """
    Squared norm of the first-order Duhamel term of (U - U^mf)Ψ_0.

    Args:
        spec: Sum specification (lattice/potential/ε/schedule and mode)
        state: Tracer state φ_0
        t: Time (>= 0)
        restriction: 'all', 'small', 'large', 'shell:<n>' or a Restriction

    Returns:
        SumValue: The deviation with its truncation bound

    Raises:
        NumericalError: If the transfer truncation cannot reach its tolerance
    """
    if t < 0.0:
        raise ConfigurationError(f"Time must be nonnegative, got: {t}")
    if isinstance(restriction, str):
        restriction = Restriction.parse(restriction)
    logger.info(f"First-order deviation d={spec.d} rho={spec.rho:g} t={t:g} "
                f"restriction={restriction.label} ({spec.mode})")
    if t == 0.0 or spec.potential.A == 0.0:
        return SumValue(0.0)
    if state.d != spec.d:
        raise ConfigurationError(f"Tracer dimension {state.d} differs from the sea dimension {spec.d}")
    if spec.mode == 'lattice':
        lo, hi = restriction.window(spec)
        return _lattice_value(spec, restriction, _lattice_kernel(spec, state, t, lo, hi), t * t)
    return _continuum_value(spec, state, t, restriction)


@dataclass(frozen=True)
class StationarySplit:
    """Small-transfer deviation split at |p_l| - |p_k| = κ."""
    kappa: float
    stationary: float           # pairs with gap <= κ
    nonstationary: float        # exact remainder, gap > κ
    bound: float                # Σ |F|²(2 + tK(Δ))²/ω² over gap > κ
    coarse_bound: float         # (2 + tK_max)²/(k_F κ)² Σ |F|² over gap > κ
    constant: float             # C = (2/t + K_max)²ρ/k_F²

    @property
    def holds(self) -> bool:
        return self.nonstationary <= self.bound * (1.0 + 1e-9) + 1e-300


def stationary_split(spec: SumSpec, state: TracerState, t: float, kappa: float) -> StationarySplit:
    """
    Split the small-transfer deviation into near-resonant and oscillating pairs.

    One partial integration gives |∫_0^t e^{iωτ}k(τ)φ dτ| <= (2 + t‖∂k φ‖)/|ω|
    per pair, and ω > k_F·κ on the oscillating set, which yields the coarse form.

    Args:
        spec: Sum specification
        state: Tracer state
        t: Time (> 0)
        kappa: Split point κ > 0

    Returns:
        StationarySplit: Both exact parts and both bounds
    """
    if not kappa > 0.0:
        raise ConfigurationError(f"kappa must be positive, got: {kappa}")
    if not t > 0.0:
        raise ConfigurationError(f"Time must be positive for the split, got: {t}")
    cut = spec.transfer_cut
    k_F = fermi_momentum(spec.lattice)
    above = math.nextafter(kappa, math.inf)
    logger.info(f"Stationary split d={spec.d} rho={spec.rho:g} t={t:g} kappa={kappa:.4g} ({spec.mode})")
    if spec.mode == 'lattice':
        engine = lattice_engine(spec)
        max_sq = max_norm_sq_below(cut, engine.h)
        stationary = engine.pair_sum(_lattice_kernel(spec, state, t, 0.0, above), max_sq)
        exact = engine.pair_sum(_lattice_kernel(spec, state, t, above, math.inf), max_sq)
        bound = engine.pair_sum(_lattice_kernel(spec, state, t, above, math.inf, 'bound'), max_sq)
        mass = engine.pair_sum(_lattice_kernel(spec, state, t, above, math.inf, 'weight'), max_sq)
        offsets = engine.h * ball_indices(spec.d, max_sq).astype(float)
        q, w = state.significant(MODE_RTOL)
        rates = 2.0 * offsets @ q.T + np.sum(offsets * offsets, axis=1)[:, None]
        k_max = float(np.max(np.sqrt((rates * rates) @ w))) if len(offsets) else 0.0
    else:
        engine = continuum_engine(spec)
        stationary = _continuum_value(spec, state, t, Restriction('small', gap_hi=above))
        exact = _continuum_value(spec, state, t, Restriction('small', gap_lo=above))
        magnitude = engine.magnitude(2)
        bound, _ = engine.pair_integral(
            lambda D: magnitude(D) * (2.0 + t * kick_derivative_bound(state, D)) ** 2,
            lambda omega: omega ** -2, 0.0, cut, lo=above,
        )
        mass, _ = engine.pair_integral(magnitude, lambda omega: 1.0, 0.0, cut, lo=above)
        k_max = kick_derivative_bound(state, cut)
    coarse = (2.0 + t * k_max) ** 2 / (k_F * kappa) ** 2 * mass
    constant = (2.0 / t + k_max) ** 2 * spec.rho / k_F ** 2
    logger.debug(f"Split kappa={kappa:.4g}: stationary={float(stationary):.6g}, "
                 f"nonstationary={float(exact):.6g} <= {bound:.6g} (coarse {coarse:.6g})")
    return StationarySplit(kappa, float(stationary), float(exact), float(bound), float(coarse), constant)


# ============================================================================
# EXCITATION REGION
# ============================================================================

def _admissible_extremes(c: float, P: float, tau: float) -> Iterator[float]:
    """
    Smallest and largest s in [-P, P], s != 0, with |s(s - c)| <= τ.

    Yields nothing when the set is empty.
    """
    if tau == 0.0:
        if c != 0.0 and abs(c) <= P:
            yield c
        return
    root = math.sqrt(c * c + 4.0 * tau)
    s_minus, s_plus = 0.5 * (c - root), 0.5 * (c + root)
    if c * c < 4.0 * tau:
        lows, highs = [(s_minus, s_plus)], []
    else:
        inner = math.sqrt(c * c - 4.0 * tau)
        s_one, s_two = 0.5 * (c - inner), 0.5 * (c + inner)
        lows, highs = [(s_minus, s_one)], [(s_two, s_plus)]
    for a, b in lows + highs:
        a, b = max(a, -P), min(b, P)
        if a <= b:
            yield a
            yield b


def _transverse_measure(x: float, m: float, k_F: float, d: int) -> float:
    """Measure of {y : k_F² - m² < |y|² <= k_F² - x²} (an indicator in d=1)."""
    if m <= abs(x):
        return 0.0
    if d == 1:
        return 1.0 if m > k_F else 0.0
    outer = (k_F - x) * (k_F + x)
    inner = max(0.0, (k_F - m) * (k_F + m))
    if d == 2:
        return 2.0 * (outer - inner) / (math.sqrt(outer) + math.sqrt(inner))
    return math.pi * (outer - inner)


def excitation_region_measure(spec: SumSpec, P0: Union[Momentum, np.ndarray, float],
                              energy_tolerance: float = 1e-6) -> float:
    """
    Volume-normalized measure of sea momenta p admitting an energy-conserving kick.

    A kick δp = s·P̂_0 with 0 < |s| <= |P_0| is admissible for p when
    |2p·δp + 2δp² - 2P_0·δp| <= tolerance and |p + δp| > k_F.

    Args:
        spec: Sum specification (lattice mode counts sea points, continuum integrates)
        P0: Tracer momentum (a Momentum on the sea lattice in lattice mode)
        energy_tolerance: Allowed energy mismatch (>= 0)

    Returns:
        float: L^{-d}·count, or the continuum volume over (2π)^d
    """
    if energy_tolerance < 0.0:
        raise ConfigurationError(f"energy_tolerance must be nonnegative, got: {energy_tolerance}")
    logger.info(f"Excitation region d={spec.d} rho={spec.rho:g} tol={energy_tolerance:g} ({spec.mode})")
    if spec.mode == 'lattice':
        return _lattice_region(spec, P0, energy_tolerance)
    if isinstance(P0, Momentum):
        P = P0.modulus
    else:
        P = float(np.linalg.norm(np.atleast_1d(np.asarray(P0, dtype=float))))
    if not P > 0.0:
        raise ConfigurationError("P0 must be nonzero")
    k_F = fermi_momentum(spec.lattice)
    tau = 0.5 * energy_tolerance

    def f(x: float) -> float:
        reach = max((abs(x + s) for s in _admissible_extremes(P - x, P, tau)), default=0.0)
        return _transverse_measure(x, reach, k_F, spec.d)

    points = [p for p in (0.0, P, 2.0 * P, -P, k_F - P) if -k_F < p < k_F]
    value, _ = integrate.quad(f, -k_F, k_F, points=sorted(set(points)), limit=400,
                              epsabs=1e-300, epsrel=1e-8)
    return value / (2.0 * math.pi) ** spec.d


def _lattice_region(spec: SumSpec, P0: Union[Momentum, np.ndarray, float], tolerance: float) -> float:
    engine = lattice_engine(spec)
    sea = engine.sea
    if not isinstance(P0, Momentum) or P0.L != sea.L or P0.d != sea.d:
        raise ConfigurationError("In lattice mode P0 must be a Momentum on the sea lattice")
    n_p = np.asarray(P0.index, dtype=np.int64)
    if not np.any(n_p):
        raise ConfigurationError("P0 must be nonzero")
    step = np.gcd.reduce(np.abs(n_p[n_p != 0]))
    primitive = n_p // step
    k = sea.indices
    admissible = np.zeros(len(k), dtype=bool)
    h2 = engine.h ** 2
    for m in range(-int(step), int(step) + 1):
        if m == 0:
            continue
        dp = m * primitive
        # exact integer energy balance, scaled by h² once
        balance = 2 * (k @ dp) + 2 * int(dp @ dp) - 2 * int(n_p @ dp)
        target = k + dp
        outside = np.sum(target * target, axis=1) > sea.norm_sq_max
        admissible |= (np.abs(balance.astype(float)) * h2 <= tolerance) & outside
    return int(np.count_nonzero(admissible)) / sea.spec.volume
