#!/usr/bin/env python3
"""
Tracer States and Kicks
Momentum-space tracer wavefunctions, the momentum kick e^{iH_0τ}e^{-iΔy}e^{-iH_0τ}
and the closed-form oscillatory time integral.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.exceptions import ConfigurationError
from src.lattice import LatticeSpec, Momentum, ball_indices, max_norm_sq_at_most

# Tolerance on Σ|φ̂(q)|² = 1
NORM_TOLERANCE = 1e-12

# |Ω|t below which the time integral switches to its Taylor series
SERIES_SWITCH = 1e-6

Index = Tuple[int, ...]
KickLike = Union[Momentum, Sequence[int]]


# ============================================================================
# TRACER STATE
# ============================================================================

@dataclass(frozen=True)
class TracerState:
    """
    Normalized tracer wavefunction φ̂ on the momentum lattice (2π/L)Z^d.

    ``amplitudes`` maps integer index vectors to complex amplitudes.
    """
    amplitudes: Dict[Index, complex] = field(repr=False)
    L: float

    def __post_init__(self):
        if not self.amplitudes:
            raise ConfigurationError("A tracer state needs at least one mode")
        dims = {len(k) for k in self.amplitudes}
        if len(dims) != 1 or dims.pop() not in (1, 2, 3):
            raise ConfigurationError("Tracer modes must share one dimension in 1..3")
        norm_sq = math.fsum(abs(a) ** 2 for a in self.amplitudes.values())
        if abs(norm_sq - 1.0) > NORM_TOLERANCE:
            raise ConfigurationError(f"Tracer state is not normalized: Σ|φ|² = {norm_sq!r}")

    @classmethod
    def normalized(cls, amplitudes: Dict[Index, complex], L: float) -> 'TracerState':
        """Build a state after rescaling the amplitudes to unit norm."""
        norm = math.sqrt(math.fsum(abs(a) ** 2 for a in amplitudes.values()))
        if norm == 0.0:
            raise ConfigurationError("Cannot normalize a zero tracer state")
        return cls({tuple(int(c) for c in k): complex(a) / norm for k, a in amplitudes.items()}, L)

    @classmethod
    def gaussian(cls, L: float, d: int = 2, center: Optional[Sequence[float]] = None,
                 width: float = 1.0, cutoff: float = 12.0) -> 'TracerState':
        """
        Discretized Gaussian wavepacket φ̂(q) ∝ exp(-|q - q_0|²/(2w²)), |q| <= cutoff.

        Args:
            L: Box side of the tracer lattice
            d: Dimension
            center: Central momentum q_0 (default: unit momentum along the first axis)
            width: Momentum width w
            cutoff: Largest retained |q|

        Returns:
            TracerState: The normalized packet
        """
        spec = LatticeSpec(d, L, 1.0)
        if center is None:
            center = (1.0,) + (0.0,) * (d - 1)
        center = np.asarray(center, dtype=float)
        if center.shape != (d,):
            raise ConfigurationError(f"Center {tuple(center)} does not match dimension {d}")
        indices = ball_indices(d, max_norm_sq_at_most(cutoff, spec.spacing))
        q = spec.spacing * indices.astype(float)
        amplitudes = np.exp(-np.sum((q - center) ** 2, axis=1) / (2.0 * width * width))
        return cls.normalized({tuple(int(c) for c in n): a for n, a in zip(indices, amplitudes)}, L)

    @property
    def d(self) -> int:
        return len(next(iter(self.amplitudes)))

    @property
    def spacing(self) -> float:
        return 2.0 * math.pi / self.L

    @property
    def indices(self) -> np.ndarray:
        return np.array(list(self.amplitudes.keys()), dtype=np.int64)

    @property
    def momenta(self) -> np.ndarray:
        """Physical tracer momenta, shape (modes, d)."""
        return self.spacing * self.indices.astype(float)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array(list(self.amplitudes.values()), dtype=complex)

    @property
    def weights(self) -> np.ndarray:
        """|φ̂(q)|² in mode order."""
        return np.abs(self.coefficients) ** 2

    def norm(self) -> float:
        return math.sqrt(math.fsum(np.abs(self.coefficients) ** 2))

    def gradient_norm(self) -> float:
        """‖∇φ‖ = (Σ_q |q|²|φ̂(q)|²)^{1/2}."""
        return math.sqrt(math.fsum(np.sum(self.momenta ** 2, axis=1) * self.weights))

    def h4_norm(self) -> float:
        """‖∇⁴φ‖ = (Σ_q |q|⁸|φ̂(q)|²)^{1/2}."""
        return math.sqrt(math.fsum(np.sum(self.momenta ** 2, axis=1) ** 4 * self.weights))

    def significant(self, rtol: float = 1e-16) -> Tuple[np.ndarray, np.ndarray]:
        """Momenta and weights of the modes carrying more than rtol of the largest weight."""
        weights = self.weights
        keep = weights > rtol * np.max(weights)
        return self.momenta[keep], weights[keep]


# ============================================================================
# PHASE KERNEL
# ============================================================================

@dataclass(frozen=True)
class PhaseKernel:
    """
    Transfers Δ = p_l - p_k and gaps ω = p_l² - p_k² of one pair or a block of pairs.

    ``delta`` has shape (d,) with a scalar ``omega`` or (pairs, d) with
    ``omega`` of shape (pairs,).
    """
    delta: np.ndarray
    omega: Union[float, np.ndarray]

    @classmethod
    def from_pair(cls, k: Union[Momentum, np.ndarray], l: Union[Momentum, np.ndarray]) -> 'PhaseKernel':
        pk = k.p if isinstance(k, Momentum) else np.asarray(k, dtype=float)
        pl = l.p if isinstance(l, Momentum) else np.asarray(l, dtype=float)
        return cls(pl - pk, float(np.dot(pl - pk, pl + pk)))

    def recoil(self, q: np.ndarray) -> np.ndarray:
        """(q+Δ)² - q² = 2q·Δ + Δ² per pair (rows) and tracer mode (columns)."""
        q = np.atleast_2d(np.asarray(q, dtype=float))
        delta = np.asarray(self.delta, dtype=float)
        return 2.0 * delta @ q.T + np.asarray(np.sum(delta * delta, axis=-1))[..., None]

    def frequencies(self, q: np.ndarray) -> np.ndarray:
        """Ω_q = ω + (q+Δ)² - q² for tracer momenta q of shape (modes, d)."""
        return np.asarray(self.omega, dtype=float)[..., None] + self.recoil(q)


# ============================================================================
# OPERATIONS
# ============================================================================

def _kick_index(state: TracerState, delta: KickLike) -> Index:
    if isinstance(delta, Momentum):
        if delta.L != state.L:
            raise ConfigurationError(f"Kick lives on L={delta.L}, state on L={state.L}")
        delta = delta.index
    index = tuple(int(c) for c in delta)
    if len(index) != state.d:
        raise ConfigurationError(f"Kick {index} does not match dimension {state.d}")
    return index


def apply_kick(state: TracerState, delta: KickLike, t: float) -> TracerState:
    """
    Shift every mode q to q + Δ with the phase e^{i((q+Δ)² - q²)t}.

    Args:
        state: Tracer state
        delta: Lattice transfer (Momentum or index vector on the state's lattice)
        t: Time of the kick

    Returns:
        TracerState: The kicked state (same norm)
    """
    shift = _kick_index(state, delta)
    h = state.spacing
    out: Dict[Index, complex] = {}
    for index, amplitude in state.amplitudes.items():
        target = tuple(a + b for a, b in zip(index, shift))
        # integer |n|² difference, exact before scaling
        gap = sum(c * c for c in target) - sum(c * c for c in index)
        out[target] = amplitude * complex(np.exp(1j * h * h * gap * t))
    return TracerState(out, state.L)


def oscillatory_time_integral(omega: Union[float, np.ndarray],
                              t: Union[float, np.ndarray]) -> Union[complex, np.ndarray]:
    """
    ∫_0^t e^{iΩτ} dτ in closed form.

    Uses (e^{iΩt} - 1)/(iΩ) = (2 sin(Ωt/2)/Ω)·e^{iΩt/2}, and the Taylor
    series t(1 + iΩt/2 - (Ωt)²/6) once |Ω|t <= 1e-6.

    Args:
        omega: Frequency (scalar or array)
        t: Upper time limit (scalar, or an array broadcasting against omega)

    Returns:
        Complex value(s) with modulus <= min(t, 2/|Ω|)
    """
    scalar = np.ndim(omega) == 0 and np.ndim(t) == 0
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    t = np.asarray(t, dtype=float)
    x = w * t
    small = np.abs(x) <= SERIES_SWITCH
    safe = np.where(small, 1.0, w)
    closed = 2.0 * np.sin(0.5 * x) / safe * np.exp(0.5j * x)
    series = t * (1.0 + 0.5j * x - x * x / 6.0)
    out = np.where(small, series, closed)
    return complex(out[0]) if scalar else out


def oscillatory_weight(omega: np.ndarray, t: float) -> np.ndarray:
    """|∫_0^t e^{iΩτ} dτ|² = t²·sinc²(Ωt/2π), vectorized."""
    return t * t * np.sinc(np.asarray(omega, dtype=float) * t / (2.0 * math.pi)) ** 2


def kick_derivative_norm(state: TracerState, delta: Union[KickLike, np.ndarray]) -> float:
    """
    ‖∂_τ k(τ)φ‖ = (Σ_q ((q+Δ)² - q²)²|φ̂(q)|²)^{1/2}, independent of τ.

    Args:
        state: Tracer state
        delta: Lattice transfer or a physical transfer vector (float array)

    Returns:
        float: The norm
    """
    if isinstance(delta, np.ndarray) and delta.dtype.kind == 'f':
        vector = delta
    else:
        vector = state.spacing * np.asarray(_kick_index(state, delta), dtype=float)
    rates = PhaseKernel(vector, 0.0).recoil(state.momenta)
    return math.sqrt(math.fsum(rates ** 2 * state.weights))


def kick_derivative_bound(state: TracerState, modulus: float) -> float:
    """|Δ|² + 2|Δ|·‖∇φ‖, an upper bound on ``kick_derivative_norm`` for |Δ| = modulus."""
    return modulus * modulus + 2.0 * modulus * state.gradient_norm()

