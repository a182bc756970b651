#!/usr/bin/env python3
"""
Interaction Potential
Radial bump potential, its cached radial Fourier transform, the split of a
momentum transfer at ρ^ε and a Paley–Wiener decay audit.

Convention: F[v](p) = ∫ v(x) e^{-ip·x} dx, so v(x) = L^{-d} Σ_k F[v](p_k) e^{ip_k·x}.
"""

import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import j0

from src.config import QUADRATURE_RTOL
from src.core.definitions import FOURIER_TABLE_FIELDS
from src.core.exceptions import ConfigurationError, NumericalError
from src.lattice import Momentum
from src.utils.logger import logger

# Gauss–Legendre order used on every panel of the composite rule
_PANEL_ORDER = 20
# Panel count doublings before the transform gives up
_MAX_REFINEMENTS = 12
# Upper bound on modulus-by-node matrix elements held at once
_CHUNK_ELEMENTS = 4_000_000
# Bucket width of floating cache keys
_FLOAT_KEY_SCALE = 1e12

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_PANEL_ORDER)


# ============================================================================
# POTENTIAL SPECIFICATION
# ============================================================================

@dataclass(frozen=True)
class PotentialSpec:
    """Radial bump v(x) = A·exp(-1/(1-(|x|/R)²)) for |x| < R, zero outside."""
    R: float = 1.0
    A: float = 1.0
    family: str = 'bump'

    def __post_init__(self):
        if self.family != 'bump':
            raise ConfigurationError(f"Unknown potential family: {self.family}")
        if not (math.isfinite(self.R) and self.R > 0.0):
            raise ConfigurationError(f"Support radius R must be positive, got: {self.R}")
        if not math.isfinite(self.A):
            raise ConfigurationError(f"Amplitude A must be finite, got: {self.A}")

    def value(self, r: Union[float, np.ndarray]) -> np.ndarray:
        """v at radius r (vectorized)."""
        x = np.asarray(r, dtype=float) / self.R
        out = np.zeros_like(x)
        inside = np.abs(x) < 1.0
        out[inside] = self.A * np.exp(-1.0 / (1.0 - x[inside] ** 2))
        return out

    def check_fits(self, L: float) -> None:
        """Raise unless the support fits the torus (R < L/2)."""
        if not self.R < L / 2.0:
            raise ConfigurationError(
                f"Potential support R={self.R} does not fit a box of side L={L} (need R < L/2)"
            )


# ============================================================================
# RADIAL TRANSFORM KERNELS
# ============================================================================

def _radial_kernel(d: int, x: np.ndarray) -> np.ndarray:
    """Angular average of e^{-ip·x}: cos, J0 or sinc for d = 1, 2, 3."""
    if d == 1:
        return np.cos(x)
    if d == 2:
        return j0(x)
    return np.sinc(x / np.pi)


def _radial_prefactor(d: int) -> float:
    """Measure of the unit sphere folded into the radial integral."""
    return {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}[d]


def _composite_rule(R: float, panels: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite Gauss–Legendre rule on [0, R]."""
    edges = np.linspace(0.0, R, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


# ============================================================================
# FOURIER TABLE
# ============================================================================

class FourierTable:
    """
    Cached radial Fourier transform of a potential in dimension d.

    Lattice momenta are keyed by the exact integer |n|² together with the box
    side; continuum moduli by a 1e-12 bucket. Reads are lock-free, inserts are
    serialized by an internal lock.
    """

    def __init__(self, spec: PotentialSpec, d: int, rtol: Optional[float] = None):
        if d not in (1, 2, 3):
            raise ConfigurationError(f"Dimension must be 1, 2 or 3, got: {d}")
        self.spec = spec
        self.d = d
        self.rtol = QUADRATURE_RTOL if rtol is None else rtol
        self._lattice_cache: Dict[Tuple[float, int], float] = {}
        self._float_cache: Dict[int, float] = {}
        self._lock = threading.Lock()
        self._audits: Dict[Tuple[int, float], 'PaleyWienerAudit'] = {}
        self._scale = abs(self._evaluate(np.array([0.0]))[0]) if spec.A != 0.0 else 0.0

    # ------------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------------

    def _evaluate(self, moduli: np.ndarray) -> np.ndarray:
        """
        Transform at the given moduli by panel doubling until two successive
        composite rules agree to the table tolerance.
        """
        moduli = np.asarray(moduli, dtype=float)
        if self.spec.A == 0.0:
            return np.zeros_like(moduli)
        R = self.spec.R
        out = np.empty_like(moduli)
        pending = np.arange(len(moduli))
        # Start with enough panels to resolve the oscillation of the largest modulus
        panels = 4 * (1 + int(np.max(moduli) * R / (2.0 * math.pi))) if len(moduli) else 4
        panels = min(panels, 1 << 14)
        previous = self._composite(moduli, panels)
        atol = self.rtol * 1e-3 * getattr(self, '_scale', 0.0)
        for _ in range(_MAX_REFINEMENTS):
            panels *= 2
            current = self._composite(moduli[pending], panels)
            diff = np.abs(current - previous)
            done = diff <= np.maximum(self.rtol * np.abs(current), atol)
            out[pending[done]] = current[done]
            pending = pending[~done]
            if len(pending) == 0:
                return out
            previous = current[~done]
        worst = float(np.max(diff[~done]))
        raise NumericalError(
            f"Radial transform did not converge for {len(pending)} moduli "
            f"(achieved absolute change {worst:.3e})",
            achieved=worst,
        )

    def _composite(self, moduli: np.ndarray, panels: int) -> np.ndarray:
        nodes, weights = _composite_rule(self.spec.R, panels)
        radial = self.spec.value(nodes) * weights * nodes ** (self.d - 1)
        keep = radial != 0.0
        nodes, radial = nodes[keep], radial[keep]
        out = np.empty(len(moduli))
        step = max(1, _CHUNK_ELEMENTS // max(1, len(nodes)))
        for start in range(0, len(moduli), step):
            block = moduli[start:start + step]
            out[start:start + step] = _radial_kernel(self.d, np.outer(block, nodes)) @ radial
        return _radial_prefactor(self.d) * out

    # ------------------------------------------------------------------------
    # Cached access
    # ------------------------------------------------------------------------

    def transform(self, p: Union[Momentum, float]) -> float:
        """
        F[v](p) for a lattice momentum or a real modulus.

        Args:
            p: Momentum (exact |n|² key) or nonnegative modulus

        Returns:
            float: Transform value
        """
        if isinstance(p, Momentum):
            spacing = 2.0 * math.pi / p.L
            return float(self.at_norm_sq(np.array([p.norm_sq_index]), spacing, p.L)[0])
        return float(self.at_moduli(np.array([float(p)]))[0])

    def at_norm_sq(self, norm_sq: np.ndarray, spacing: float, L: float) -> np.ndarray:
        """
        Transform at lattice momenta given by their integer |n|².

        Args:
            norm_sq: Integer array of squared index norms (any shape)
            spacing: Lattice spacing 2π/L
            L: Box side (part of the cache key)

        Returns:
            np.ndarray: Values with the shape of ``norm_sq``
        """
        norm_sq = np.asarray(norm_sq, dtype=np.int64)
        keys, inverse = np.unique(norm_sq, return_inverse=True)
        cache = self._lattice_cache
        values = np.array([cache.get((L, int(k)), np.nan) for k in keys])
        missing = np.isnan(values)
        if np.any(missing):
            computed = self._evaluate(spacing * np.sqrt(keys[missing].astype(float)))
            values[missing] = computed
            with self._lock:
                for k, v in zip(keys[missing], computed):
                    cache[(L, int(k))] = float(v)
        return values[inverse].reshape(norm_sq.shape)

    def at_moduli(self, moduli: np.ndarray) -> np.ndarray:
        """Transform at real moduli, cached on 1e-12 buckets."""
        moduli = np.abs(np.asarray(moduli, dtype=float))
        buckets = np.rint(moduli * _FLOAT_KEY_SCALE).astype(np.int64)
        keys, first, inverse = np.unique(buckets, return_index=True, return_inverse=True)
        cache = self._float_cache
        values = np.array([cache.get(int(k), np.nan) for k in keys])
        missing = np.isnan(values)
        if np.any(missing):
            computed = self._evaluate(moduli.ravel()[first[missing]])
            values[missing] = computed
            with self._lock:
                for k, v in zip(keys[missing], computed):
                    cache[int(k)] = float(v)
        return values[inverse].reshape(moduli.shape)

    def decay_audit(self, order: int = 8, p_max: Optional[float] = None) -> 'PaleyWienerAudit':
        """Memoized ``paley_wiener_audit`` of this table."""
        minimum = 20.0 * 2.0 * math.pi / self.spec.R
        p_max = minimum if p_max is None else max(minimum, float(p_max))
        # Round the grid end up to a power of two so nearby requests share an audit
        p_max = 2.0 ** math.ceil(math.log2(p_max))
        key = (order, p_max)
        audit = self._audits.get(key)
        if audit is None:
            audit = paley_wiener_audit(self, order, p_max=p_max)
            with self._lock:
                self._audits[key] = audit
        return audit

    def __len__(self) -> int:
        return len(self._lattice_cache) + len(self._float_cache)

    # ------------------------------------------------------------------------
    # Persistence
    # ------------------------------------------------------------------------

    def dump_csv(self, path: Path, moduli: Optional[Iterable[float]] = None) -> Path:
        """
        Write (modulus, value) rows at 17 significant digits.

        Args:
            path: Destination CSV file
            moduli: Moduli to tabulate (default: every cached entry)

        Returns:
            Path: The written file
        """
        if moduli is None:
            rows = [(math.sqrt(k) * 2.0 * math.pi / L, v) for (L, k), v in self._lattice_cache.items()]
            rows += [(k / _FLOAT_KEY_SCALE, v) for k, v in self._float_cache.items()]
        else:
            grid = np.asarray(list(moduli), dtype=float)
            rows = list(zip(grid, self.at_moduli(grid)))
        df = pd.DataFrame(sorted(rows), columns=FOURIER_TABLE_FIELDS)
        try:
            df.to_csv(path, index=False, float_format='%.17g', encoding='utf-8')
        except Exception as e:
            raise RuntimeError(f"Failed to write Fourier table to {path}: {e}") from e
        logger.info(f"Wrote {len(df)} Fourier table rows to {path}")
        return Path(path)

    def load_csv(self, path: Path) -> int:
        """
        Seed the floating cache from a CSV written by ``dump_csv``.

        Returns:
            int: Number of rows loaded
        """
        df = pd.read_csv(path, dtype=float)
        if list(df.columns) != FOURIER_TABLE_FIELDS:
            raise ConfigurationError(f"Unexpected Fourier table columns in {path}: {list(df.columns)}")
        with self._lock:
            for modulus, value in zip(df['modulus'], df['value']):
                self._float_cache[int(round(modulus * _FLOAT_KEY_SCALE))] = float(value)
        return len(df)


# ============================================================================
# OPERATIONS
# ============================================================================

def fourier_transform(spec: PotentialSpec, d: int, p: Union[Momentum, float],
                      table: Optional[FourierTable] = None) -> float:
    """
    F[v](p) through a (possibly shared) Fourier table.

    Args:
        spec: Potential specification
        d: Dimension
        p: Lattice momentum or modulus
        table: Table to use; a fresh one is built when omitted

    Returns:
        float: Transform value
    """
    if table is None:
        table = FourierTable(spec, d)
    return table.transform(p)


def split_small_large(value: float, p: float, eps: float, rho: float) -> Tuple[float, float]:
    """
    Assign a transfer-momentum contribution to the small or large part.

    The boundary |p| = ρ^ε belongs to the large part (θ(0) = 1).

    Returns:
        Tuple[float, float]: (small part, large part)
    """
    if not 0.0 < eps < 0.5:
        raise ConfigurationError(f"eps must lie in (0, 1/2), got: {eps}")
    if not rho > 0.0:
        raise ConfigurationError(f"rho must be positive, got: {rho}")
    if abs(p) < rho ** eps:
        return value, 0.0
    return 0.0, value


@dataclass(frozen=True)
class PaleyWienerAudit:
    """Result of a decay audit |F[v](q)| <= D/(1+|q|)^order."""
    order: int
    D_grid: float          # smallest constant valid on the fitting grid
    D: float               # constant certified on the 10x denser grid
    p_max: float
    grid_points: int
    verified: bool         # True when D_grid already held on the dense grid

    def bound(self, q: Union[float, np.ndarray]) -> np.ndarray:
        """The certified envelope D/(1+|q|)^order."""
        return self.D / (1.0 + np.abs(q)) ** self.order


def paley_wiener_audit(table: FourierTable, order: int,
                       moduli: Optional[np.ndarray] = None,
                       p_max: Optional[float] = None) -> PaleyWienerAudit:
    """
    Fit the decay constant D_p on a grid and certify it on a denser one.

    Args:
        table: Fourier table of the potential
        order: Polynomial decay order p
        moduli: Fitting grid (default: 2001 points on [0, p_max])
        p_max: Grid end (default: 10·2π/R)

    Returns:
        PaleyWienerAudit: Grid constant, certified constant and verdict

    Raises:
        ConfigurationError: If the grid does not reach 10·2π/R
    """
    if order < 0:
        raise ConfigurationError(f"Decay order must be nonnegative, got: {order}")
    minimum = 10.0 * 2.0 * math.pi / table.spec.R
    if moduli is None:
        p_max = max(p_max or minimum, minimum)
        moduli = np.linspace(0.0, p_max, 2001)
    moduli = np.sort(np.asarray(moduli, dtype=float))
    if moduli[-1] < minimum * (1.0 - 1e-12):
        raise ConfigurationError(
            f"Audit grid must reach 10*2pi/R = {minimum:.6g}, got {moduli[-1]:.6g}"
        )
    weights = (1.0 + moduli) ** order
    d_grid = float(np.max(np.abs(table.at_moduli(moduli)) * weights))
    dense = np.linspace(moduli[0], moduli[-1], 10 * (len(moduli) - 1) + 1)
    d_dense = float(np.max(np.abs(table._evaluate(dense)) * (1.0 + dense) ** order))
    audit = PaleyWienerAudit(
        order=order,
        D_grid=d_grid,
        D=max(d_grid, d_dense),
        p_max=float(moduli[-1]),
        grid_points=len(moduli),
        verified=d_dense <= d_grid,
    )
    logger.debug(
        f"Paley-Wiener audit order={order}: D_grid={d_grid:.6g}, D={audit.D:.6g}, "
        f"verified={audit.verified}"
    )
    return audit
