"""
Tests for tracer states, kicks and the first-order Duhamel deviation.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from src.core.exceptions import ConfigurationError
from src.duhamel import (
    PhaseKernel,
    Restriction,
    TracerState,
    apply_kick,
    excitation_region_measure,
    first_order_deviation,
    kick_derivative_bound,
    kick_derivative_norm,
    oscillatory_time_integral,
    oscillatory_weight,
    stationary_split,
)
from src.lattice import LatticeSpec, Momentum, build_fermi_sea
from src.potential import PotentialSpec
from src.sums import SumSpec, fluctuation_sum, fourier_table


def brute_force_deviation(lattice, potential, state, t, n_max=2000):
    """L^{-2d} Σ_{k,l} |F|² Σ_q |φ̂(q)|² |∫_0^t e^{iΩ_q τ}dτ|² for d = 1."""
    sea = build_fermi_sea(lattice)
    table = fourier_table(potential, 1)
    h = lattice.spacing
    n = np.arange(-n_max, n_max + 1)
    outside = n[n * n > sea.norm_sq_max]
    q, w = state.momenta[:, 0], state.weights
    total = 0.0
    for (k,) in sea.indices:
        delta = h * (outside - k).astype(float)
        F2 = np.abs(table.at_norm_sq((outside - k) ** 2, h, lattice.L)) ** 2
        omega = h * h * (outside * outside - k * k).astype(float)
        Omega = omega[:, None] + 2.0 * delta[:, None] * q[None, :] + (delta * delta)[:, None]
        total += math.fsum(F2 * (oscillatory_weight(Omega, t) @ w))
    return total / lattice.L ** 2


class TestTracerState:
    """Construction and norms."""

    def test_gaussian_is_normalized(self, tracer_2d):
        """Σ|φ̂|² = 1 after construction."""
        assert tracer_2d.norm() == pytest.approx(1.0, abs=1e-12)
        assert tracer_2d.d == 2
        assert np.sum(tracer_2d.weights) == pytest.approx(1.0)

    def test_unnormalized_amplitudes_rejected(self):
        """Raw amplitudes must already have unit norm."""
        with pytest.raises(ConfigurationError):
            TracerState({(0,): 2.0}, 1.0)
        state = TracerState.normalized({(0,): 2.0, (1,): 2.0j}, 1.0)
        assert state.norm() == pytest.approx(1.0)

    def test_mixed_dimensions_rejected(self):
        """All modes share one dimension."""
        with pytest.raises(ConfigurationError):
            TracerState.normalized({(0,): 1.0, (0, 1): 1.0}, 1.0)

    def test_center_must_match_dimension(self):
        """A 3-vector center cannot seed a planar packet."""
        with pytest.raises(ConfigurationError):
            TracerState.gaussian(2.0 * math.pi, 2, center=(1.0, 0.0, 0.0))

    def test_gradient_norm_of_single_mode(self):
        """A plane wave at index (2,) has ‖∇φ‖ = 2h and ‖∇⁴φ‖ = (2h)⁴."""
        state = TracerState({(2,): 1.0}, 2.0 * math.pi)
        assert state.gradient_norm() == pytest.approx(2.0)
        assert state.h4_norm() == pytest.approx(16.0)


class TestKicks:
    """Momentum kicks and their time derivative."""

    def test_kick_shifts_and_preserves_norm(self, tracer_2d):
        """Every mode moves by Δ and the norm is unchanged."""
        kicked = apply_kick(tracer_2d, (1, -1), 0.7)
        assert kicked.norm() == pytest.approx(1.0, abs=1e-12)
        assert set(kicked.amplitudes) == {(a + 1, b - 1) for a, b in tracer_2d.amplitudes}

    def test_kick_phase(self):
        """Phase e^{i((q+Δ)² - q²)t} on a plane wave."""
        state = TracerState({(1,): 1.0}, 2.0 * math.pi)
        kicked = apply_kick(state, Momentum((2,), 2.0 * math.pi), 0.5)
        assert kicked.amplitudes[(3,)] == pytest.approx(complex(np.exp(1j * 8.0 * 0.5)))

    def test_kick_on_foreign_lattice_rejected(self, tracer_2d):
        """The kick must live on the state's lattice."""
        with pytest.raises(ConfigurationError):
            apply_kick(tracer_2d, Momentum((1, 0), 1.0), 0.0)
        with pytest.raises(ConfigurationError):
            apply_kick(tracer_2d, (1,), 0.0)

    def test_derivative_norm_below_bound(self, tracer_2d):
        """‖∂_τ kφ‖ <= |Δ|² + 2|Δ|‖∇φ‖."""
        for index in [(1, 0), (2, -3), (0, 5)]:
            modulus = tracer_2d.spacing * math.hypot(*index)
            assert kick_derivative_norm(tracer_2d, index) <= kick_derivative_bound(tracer_2d, modulus) + 1e-12


class TestPhaseKernel:
    """Frequencies of pair transfers seen by tracer modes"""

    def test_frequencies_match_energy_difference(self):
        """Ω_q = ω + |q+Δ|² - |q|² on seeded random q, Δ and ω."""
        rng = np.random.default_rng(11)
        q = rng.normal(scale=5.0, size=(50, 2))
        delta = rng.normal(scale=3.0, size=(7, 2))
        omega = rng.normal(scale=10.0, size=7)
        got = PhaseKernel(delta, omega).frequencies(q)
        expected = (omega[:, None]
                    + np.sum((q[None, :, :] + delta[:, None, :]) ** 2, axis=-1)
                    - np.sum(q * q, axis=-1)[None, :])
        assert got.shape == (7, 50)
        assert np.allclose(got, expected, rtol=1e-12, atol=1e-9)

    def test_block_rows_equal_single_pairs(self):
        """A block of pairs gives the rows of the single-pair kernels."""
        L = 2.0 * math.pi
        rng = np.random.default_rng(12)
        q = rng.normal(size=(9, 2))
        pairs = [(Momentum((0, 1), L), Momentum((2, -1), L)),
                 (Momentum((1, 1), L), Momentum((-3, 0), L)),
                 (Momentum((-1, 0), L), Momentum((0, 4), L))]
        singles = [PhaseKernel.from_pair(k, l) for k, l in pairs]
        block = PhaseKernel(np.array([s.delta for s in singles]),
                            np.array([s.omega for s in singles]))
        rows = block.frequencies(q)
        for i, single in enumerate(singles):
            assert np.allclose(rows[i], single.frequencies(q), rtol=1e-12, atol=1e-12)

    def test_from_pair_gap_is_energy_difference(self):
        """ω = |p_l|² - |p_k|² and Δ = p_l - p_k."""
        k, l = Momentum((1, 2), 3.0), Momentum((-2, 5), 3.0)
        kernel = PhaseKernel.from_pair(k, l)
        assert kernel.omega == pytest.approx(float(l.p @ l.p - k.p @ k.p), rel=1e-12)
        assert np.allclose(kernel.delta, l.p - k.p)

    def test_recoil_vanishes_without_transfer(self):
        """Δ = 0 leaves Ω_q = ω for every mode."""
        q = np.random.default_rng(13).normal(size=(5, 3))
        assert np.allclose(PhaseKernel(np.zeros(3), 2.5).frequencies(q), 2.5)


class TestTimeIntegral:
    """Closed-form ∫_0^t e^{iΩτ}dτ."""

    @pytest.mark.parametrize("omega", [-3.0, 0.25, 7.5])
    def test_matches_quadrature(self, omega):
        """Real and imaginary parts agree with adaptive quadrature."""
        t = 2.0
        re, _ = integrate.quad(lambda s: math.cos(omega * s), 0.0, t, epsabs=1e-14)
        im, _ = integrate.quad(lambda s: math.sin(omega * s), 0.0, t, epsabs=1e-14)
        assert oscillatory_time_integral(omega, t) == pytest.approx(complex(re, im), abs=1e-12)

    def test_small_frequency_series(self):
        """|Ω|t below the switch uses the Taylor series and tends to t."""
        assert oscillatory_time_integral(0.0, 3.0) == 3.0
        value = oscillatory_time_integral(1e-9, 1.0)
        assert value.real == pytest.approx(1.0, abs=1e-15)
        assert value.imag == pytest.approx(5e-10, rel=1e-6)

    def test_modulus_bound_on_random_pairs(self):
        """|I(Ω, t)| <= min(t, 2/|Ω|) for a million seeded (Ω, t), series branch included."""
        rng = np.random.default_rng(20)
        size = 1_000_000
        omega = rng.choice([-1.0, 1.0], size) * 10.0 ** rng.uniform(-9.0, 3.0, size)
        t = rng.uniform(0.0, 20.0, size)
        values = oscillatory_time_integral(omega, t)
        assert values.shape == (size,)
        bound = np.minimum(t, 2.0 / np.abs(omega))
        assert np.all(np.abs(values) <= bound * (1.0 + 1e-12))

    def test_weight_is_squared_modulus(self):
        """oscillatory_weight = |I|²."""
        omega = np.linspace(-50.0, 50.0, 201)
        values = oscillatory_time_integral(omega, 1.5)
        assert np.allclose(oscillatory_weight(omega, 1.5), np.abs(values) ** 2, rtol=1e-12, atol=0.0)


class TestRestriction:
    """Pair restrictions."""

    def test_parse(self):
        """Known labels round-trip through parse."""
        for text in ('all', 'small', 'large', 'shell:2'):
            assert Restriction.parse(text).label == text

    @pytest.mark.parametrize("text", ['medium', 'shell:', 'shell:two'])
    def test_parse_rejects_unknown(self, text):
        """Anything else is a configuration error."""
        with pytest.raises(ConfigurationError):
            Restriction.parse(text)

    def test_shell_index_in_range(self):
        """Shell indices run over 0..M."""
        spec = SumSpec(lattice=LatticeSpec(2, 1.0, 100.0), eps=0.1, M=3)
        Restriction.parse('shell:3').window(spec)
        with pytest.raises(ConfigurationError):
            Restriction.parse('shell:4').window(spec)


class TestDeviation:
    """First-order deviation."""

    def test_trivial_cases_vanish(self, small_lattice, tracer_2d):
        """t = 0 or A = 0 give exactly zero."""
        spec = SumSpec(lattice=small_lattice, mode='lattice')
        assert first_order_deviation(spec, tracer_2d, 0.0) == 0.0
        zero = SumSpec(lattice=small_lattice, potential=PotentialSpec(A=0.0), mode='lattice')
        assert first_order_deviation(zero, tracer_2d, 1.0) == 0.0

    def test_invalid_arguments(self, small_lattice, tracer_2d):
        """Negative times and dimension mismatches are rejected."""
        spec = SumSpec(lattice=small_lattice, mode='lattice')
        with pytest.raises(ConfigurationError):
            first_order_deviation(spec, tracer_2d, -1.0)
        line = TracerState.gaussian(5.0, 1, cutoff=3.0)
        with pytest.raises(ConfigurationError):
            first_order_deviation(spec, line, 1.0)

    def test_lattice_matches_brute_force(self):
        """d = 1 lattice deviation equals direct enumeration of pairs and modes."""
        lattice = LatticeSpec(1, 4.0, 0.75)
        potential = PotentialSpec(R=1.0)
        state = TracerState.gaussian(4.0, 1, width=1.0, cutoff=3.0)
        spec = SumSpec(lattice=lattice, potential=potential, mode='lattice')
        value = first_order_deviation(spec, state, 2.0)
        assert value == pytest.approx(brute_force_deviation(lattice, potential, state, 2.0), rel=1e-5)

    def test_short_time_limit(self, small_lattice, bump, tracer_2d):
        """For small t the deviation is t² times the fluctuation sum."""
        spec = SumSpec(lattice=small_lattice, potential=bump, mode='lattice')
        t = 1e-4
        value = first_order_deviation(spec, tracer_2d, t)
        assert value / t ** 2 == pytest.approx(float(fluctuation_sum(spec)), rel=1e-3)

    def test_small_and_large_add_up(self, bump, tracer_2d):
        """Small and large transfers partition every pair."""
        spec = SumSpec(lattice=LatticeSpec(2, 5.0, 4.0), potential=bump, eps=0.25, mode='lattice')
        whole = first_order_deviation(spec, tracer_2d, 1.0)
        small = first_order_deviation(spec, tracer_2d, 1.0, 'small')
        large = first_order_deviation(spec, tracer_2d, 1.0, 'large')
        assert small > 0.0
        assert small + large == pytest.approx(float(whole), rel=1e-5)

    @pytest.mark.slow
    def test_continuum_positive_and_bounded(self):
        """Continuum deviation is positive and below t² times the fluctuation sum."""
        spec = SumSpec(lattice=LatticeSpec(2, 1.0, 10.0))
        plane_wave = TracerState({(2, 0): 1.0}, 4.0 * math.pi)
        value = first_order_deviation(spec, plane_wave, 0.5)
        assert 0.0 < value <= 0.25 * float(fluctuation_sum(spec)) * (1.0 + 1e-6)


class TestStationarySplit:
    """Near-resonant versus oscillating pairs."""

    def test_parts_add_up_and_bound_holds(self, bump, tracer_2d):
        """stationary + nonstationary = small deviation, and the partial-integration bound holds."""
        spec = SumSpec(lattice=LatticeSpec(2, 5.0, 4.0), potential=bump, eps=0.25, mode='lattice')
        split = stationary_split(spec, tracer_2d, 1.0, 0.2)
        small = first_order_deviation(spec, tracer_2d, 1.0, 'small')
        assert split.stationary + split.nonstationary == pytest.approx(float(small), rel=1e-10)
        assert split.holds
        assert split.constant > 0.0

    def test_invalid_split_arguments(self, small_lattice, tracer_2d):
        """κ and t must be positive."""
        spec = SumSpec(lattice=small_lattice, mode='lattice')
        with pytest.raises(ConfigurationError):
            stationary_split(spec, tracer_2d, 1.0, 0.0)
        with pytest.raises(ConfigurationError):
            stationary_split(spec, tracer_2d, 0.0, 0.1)


class TestExcitationRegion:
    """Energy-conserving particle-hole region."""

    def test_one_dimensional_slow_tracer_excites_nothing(self):
        """In d = 1 a tracer slower than k_F = πρ cannot kick a particle out."""
        spec = SumSpec(lattice=LatticeSpec(1, 1.0, 1.0))
        assert excitation_region_measure(spec, 1.0, energy_tolerance=0.0) == 0.0

    def test_one_dimensional_fast_tracer(self):
        """For |P_0| > k_F the admissible set is 0 <= p < k_F, of measure k_F/2π."""
        spec = SumSpec(lattice=LatticeSpec(1, 1.0, 1.0))
        assert excitation_region_measure(spec, 5.0, energy_tolerance=0.0) == pytest.approx(0.5, rel=1e-8)

    def test_two_dimensional_region_positive(self):
        """Slow tracers still excite near the Fermi surface in d = 2."""
        spec = SumSpec(lattice=LatticeSpec(2, 1.0, 100.0))
        assert excitation_region_measure(spec, np.array([1.0, 0.0])) > 0.0

    def test_lattice_region_by_hand(self):
        """Sea {-2..2} with P_0 = 5: only p = 0, 1, 2 reach q = 5."""
        L = 2.0 * math.pi
        spec = SumSpec(lattice=LatticeSpec(1, L, 5.0 / L), mode='lattice')
        assert excitation_region_measure(spec, Momentum((5,), L)) == pytest.approx(3.0 / L)

    def test_lattice_region_needs_lattice_momentum(self):
        """Lattice mode rejects a bare float momentum and a zero momentum."""
        L = 2.0 * math.pi
        spec = SumSpec(lattice=LatticeSpec(1, L, 5.0 / L), mode='lattice')
        with pytest.raises(ConfigurationError):
            excitation_region_measure(spec, 5.0)
        with pytest.raises(ConfigurationError):
            excitation_region_measure(spec, Momentum((0,), L))

    def test_negative_tolerance_rejected(self):
        """energy_tolerance >= 0."""
        with pytest.raises(ConfigurationError):
            excitation_region_measure(SumSpec(lattice=LatticeSpec(2, 1.0, 10.0)), 1.0, -1.0)
