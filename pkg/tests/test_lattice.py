"""
Tests for the momentum lattice, Fermi seas and lattice-point counting.
"""

import itertools
import math

import numpy as np
import pytest

from src.core.exceptions import ConfigurationError, DegenerateSeaError, ResourceLimitError
from src.lattice import (
    LatticeSpec,
    Momentum,
    annulus_count,
    ball_indices,
    build_fermi_sea,
    count_norm_sq_at_most,
    enumerate_momenta,
    fermi_momentum,
    max_norm_sq_at_most,
)


def brute_force_count(d, m):
    """Count integer vectors with |n|² <= m by direct enumeration."""
    r = math.isqrt(max(m, 0))
    return sum(1 for n in itertools.product(range(-r, r + 1), repeat=d) if sum(c * c for c in n) <= m)


class TestCounting:
    """Exact lattice-point counts."""

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_count_matches_enumeration(self, d):
        """Recursive count equals brute force for small bounds."""
        for m in range(0, 30):
            assert count_norm_sq_at_most(d, m) == brute_force_count(d, m)

    def test_negative_bound_is_empty(self):
        """m < 0 contains no point."""
        assert count_norm_sq_at_most(2, -1) == 0
        assert ball_indices(3, -1).shape == (0, 3)

    def test_ball_indices_sorted_by_norm_then_lexicographic(self):
        """Ball points come ordered by |n|² with lexicographic ties."""
        points = ball_indices(2, 5)
        assert len(points) == count_norm_sq_at_most(2, 5)
        keys = [(int(p @ p), tuple(int(c) for c in p)) for p in points]
        assert keys == sorted(keys)
        assert tuple(points[0]) == (0, 0)
        assert [tuple(p) for p in points[1:5]] == [(-1, 0), (0, -1), (0, 1), (1, 0)]

    def test_ball_budget_enforced(self):
        """Exceeding the point budget raises ResourceLimitError."""
        with pytest.raises(ResourceLimitError):
            ball_indices(3, 10_000, max_points=1000)

    def test_annulus_count_matches_enumeration(self):
        """r_lo <= |p| < r_hi counted exactly."""
        spec = LatticeSpec(2, 2.0 * math.pi, 1.0)
        points = ball_indices(2, 40)
        moduli = np.sqrt(np.sum(points * points, axis=1))
        for r_lo, r_hi in [(0.0, 1.0), (1.0, 2.0), (1.0, math.sqrt(5.0)), (2.5, 6.0)]:
            expected = int(np.sum((moduli >= r_lo) & (moduli < r_hi)))
            assert annulus_count(spec, r_lo, r_hi) == expected

    def test_annulus_rejects_reversed_radii(self):
        """r_lo > r_hi is a configuration error."""
        with pytest.raises(ConfigurationError):
            annulus_count(LatticeSpec(2, 1.0, 1.0), 2.0, 1.0)


class TestFermiSea:
    """Shell-complete sea construction."""

    def test_two_dimensional_sea(self):
        """k_F = 2 on the unit-spacing lattice fills the 13 points with |n|² <= 4."""
        spec = LatticeSpec(2, 2.0 * math.pi, 1.0 / math.pi)
        assert fermi_momentum(spec) == pytest.approx(2.0)
        sea = build_fermi_sea(spec)
        assert sea.N == 13
        assert sea.norm_sq_max == 4
        assert sea.k_F == pytest.approx(2.0)
        assert sea.rho_eff == pytest.approx(13.0 / (2.0 * math.pi) ** 2)
        assert sea.contains((2, 0))
        assert not sea.contains((2, 1))

    def test_one_dimensional_sea(self):
        """d = 1 seas are symmetric intervals with an odd particle number."""
        sea = build_fermi_sea(LatticeSpec(1, 4.0, 0.75))
        assert sea.N == 3
        assert [m.index for m in sea.momentum_list()] == [(0,), (-1,), (1,)]

    def test_sea_is_shell_complete(self):
        """Every point of the outermost occupied shell is occupied."""
        sea = build_fermi_sea(LatticeSpec(3, 10.0, 0.5))
        assert sea.N == count_norm_sq_at_most(3, sea.norm_sq_max)

    def test_empty_sea_rejected(self):
        """ρ·L^d < 1 is degenerate."""
        with pytest.raises(DegenerateSeaError):
            build_fermi_sea(LatticeSpec(2, 1.0, 0.5))

    def test_effective_density_converges(self):
        """ρ_eff approaches ρ as the box grows."""
        sea = build_fermi_sea(LatticeSpec(2, 160.0, 1.0))
        assert sea.rho_eff == pytest.approx(1.0, rel=0.01)

    def test_kinetic_energy(self):
        """Σ p² over the sea computed from exact index norms."""
        sea = build_fermi_sea(LatticeSpec(2, 2.0 * math.pi, 1.0 / math.pi))
        # 4 points at |n|²=1, 4 at 2, 4 at 4
        assert sea.kinetic_energy == pytest.approx(4 * 1 + 4 * 2 + 4 * 4)


class TestSpecsAndMomenta:
    """Validation and small helpers."""

    @pytest.mark.parametrize("d,L,rho", [(4, 1.0, 1.0), (2, 0.0, 1.0), (2, 1.0, -1.0), (2, math.inf, 1.0)])
    def test_invalid_spec(self, d, L, rho):
        """Dimension outside 1..3 or nonpositive L, ρ are rejected."""
        with pytest.raises(ConfigurationError):
            LatticeSpec(d, L, rho)

    def test_momentum_arithmetic(self):
        """Momenta add and subtract on their index vectors."""
        L = 2.0 * math.pi
        p = Momentum((1, 2), L) + Momentum((0, -1), L)
        assert p.index == (1, 1)
        assert (p - Momentum((1, 1), L)).index == (0, 0)
        assert p.modulus == pytest.approx(math.sqrt(2.0))

    def test_enumerate_momenta_inclusive_cutoff(self):
        """A point exactly on the cutoff radius is included."""
        spec = LatticeSpec(2, 2.0 * math.pi, 1.0)
        momenta = enumerate_momenta(spec, 1.0)
        assert len(momenta) == 5
        assert max_norm_sq_at_most(1.0, 1.0) == 1

    def test_enumerate_momenta_rejects_zero_cutoff(self):
        """cutoff must be positive."""
        with pytest.raises(ConfigurationError):
            enumerate_momenta(LatticeSpec(2, 1.0, 1.0), 0.0)
