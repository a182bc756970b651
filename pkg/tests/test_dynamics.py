"""
Tests for the particle-hole-truncated dynamics.

The second-quantized matrix is checked against an independent
first-quantized construction on three fermions in five one-dimensional
modes, and the Krylov propagator against closed-form two-level motion.
"""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from src.core.exceptions import ConfigurationError, ResourceLimitError
from src.duhamel import TracerState
from src.dynamics import (
    DynamicsSpec,
    SparseHamiltonian,
    Truncation,
    build_basis,
    build_hamiltonians,
    deviation_curve,
    first_quantized_matrix,
    hopping_sign,
    mean_field_correction,
    propagate,
)
from src.lattice import LatticeSpec, build_fermi_sea
from src.potential import PotentialSpec
from src.reporting.claims import oracle_system, rabi_state
from src.sums import fourier_table

BOX = 4.0
SPACING = 2.0 * math.pi / BOX


@pytest.fixture(scope="module")
def line_sea():
    """Three fermions at indices 0, -1, 1 on a box of side 4."""
    return build_fermi_sea(LatticeSpec(1, BOX, 0.75))


@pytest.fixture(scope="module")
def line_spec():
    """Five orbitals and five tracer recoils."""
    return DynamicsSpec(LatticeSpec(1, BOX, 0.75), PotentialSpec(R=1.0, A=1.0),
                        Truncation(2, 1.5 * SPACING, 2.0 * SPACING))


class TestBasis:
    """Sector enumeration."""

    @pytest.mark.parametrize("pairs,size", [(0, 1), (1, 5), (2, 8)])
    def test_sector_sizes(self, line_sea, pairs, size):
        """Counted by hand for particles at ±2 and recoils |w| <= 2."""
        basis = build_basis(line_sea, Truncation(pairs, 1.5 * SPACING, 2.0 * SPACING), (0,))
        assert len(basis) == size
        assert basis[0].excitations == 0
        assert basis[0].q == (0,)

    def test_every_state_in_sector(self, line_sea):
        """Total momentum is K for every state."""
        basis = build_basis(line_sea, Truncation(2, 1.5 * SPACING, 2.0 * SPACING), (1,))
        assert all(basis.total_momentum(s) == (1,) for s in basis)
        assert list(basis.excitation_numbers()) == sorted(basis.excitation_numbers())

    def test_basis_cap(self, line_sea):
        """A basis larger than the cap is a resource error."""
        with pytest.raises(ResourceLimitError):
            build_basis(line_sea, Truncation(2, 1.5 * SPACING, 2.0 * SPACING), (0,), max_size=3)

    def test_invalid_inputs(self, line_sea):
        """Three pairs or a planar sector are rejected."""
        with pytest.raises(ConfigurationError):
            Truncation(3)
        with pytest.raises(ConfigurationError):
            Truncation(1, -1.0)
        with pytest.raises(ConfigurationError):
            build_basis(line_sea, Truncation(), (0, 0))

    def test_dump(self, line_sea, tmp_path):
        """One line per state after two header lines."""
        basis = build_basis(line_sea, Truncation(2, 1.5 * SPACING, 2.0 * SPACING), (0,))
        lines = basis.dump(tmp_path / 'basis.txt').read_text(encoding='utf-8').splitlines()
        assert lines[0] == '# sector 0 size 8'
        assert lines[2] == '0 0 - -'
        assert len(lines) == 2 + len(basis)


class TestHamiltonian:
    """Matrix assembly."""

    def test_matches_first_quantized_oracle(self):
        """Second-quantized signs and couplings reproduce the antisymmetrized matrix."""
        H, oracle = oracle_system()
        assert H.hermitian
        assert np.max(np.abs(H.to_dense() - oracle)) <= 1e-10

    def test_hermitian_and_mean_field_diagonal(self, line_sea, line_spec):
        """H is hermitian and H^mf is diagonal with H's diagonal minus E_re."""
        basis = build_basis(line_sea, line_spec.truncation, (0,))
        H, Hmf = build_hamiltonians(basis, fourier_table(line_spec.potential, 1), line_spec, recollision=0.25)
        assert H.check_hermitian()
        assert Hmf.is_diagonal
        assert np.allclose(Hmf.diagonal(), H.diagonal() - 0.25, rtol=0.0, atol=1e-12)

    def test_unexcited_energy(self, line_sea, line_spec):
        """Diagonal of (K, Ω₀) is K² + Σ p² + ρ_eff F(0)."""
        basis = build_basis(line_sea, line_spec.truncation, (1,))
        table = fourier_table(line_spec.potential, 1)
        H, _ = build_hamiltonians(basis, table, line_spec, recollision=0.0)
        expected = SPACING ** 2 * (1 + 0 + 1 + 1) + line_sea.rho_eff * table.transform(0.0)
        assert H.diagonal()[0].real == pytest.approx(expected, rel=1e-12)

    def test_hopping_sign(self):
        """Signs count occupied ordinals passed by the moving fermion."""
        assert hopping_sign([0, 1, 2], 1, 3) == -1
        assert hopping_sign([0, 1, 2], 0, 3) == 1
        assert hopping_sign([0, 1, 2], 2, 3) == 1

    def test_oracle_on_second_sector(self, line_sea, line_spec):
        """Agreement also holds away from K = 0."""
        basis = build_basis(line_sea, line_spec.truncation, (-1,))
        table = fourier_table(line_spec.potential, 1)
        H, _ = build_hamiltonians(basis, table, line_spec, recollision=0.0)
        assert np.max(np.abs(H.to_dense() - first_quantized_matrix(basis, table))) <= 1e-10

    def test_one_dimensional_correction_is_zero(self, line_spec):
        """E_re does not enter the one-dimensional mean-field generator."""
        assert mean_field_correction(line_spec) == 0.0

    def test_matrix_dump(self, tmp_path):
        """Triplets are written after a size header."""
        H = SparseHamiltonian.from_entries(2, [0, 1], [1, 0], [0.5, 0.5])
        text = H.dump(tmp_path / 'H.txt').read_text(encoding='utf-8')
        assert text.startswith('# size 2')
        assert len(np.loadtxt(tmp_path / 'H.txt')) == 2


class TestPropagate:
    """Krylov time stepping."""

    def test_two_level_rabi(self):
        """Closed-form two-level motion to 1e-10."""
        a, b, c = 0.3, 0.7, -0.2
        H = SparseHamiltonian.from_entries(2, [0, 0, 1, 1], [0, 1, 0, 1], [a, b, b, c])
        times = np.linspace(0.0, 10.0, 11)
        for psi, t in zip(propagate(H, np.array([1.0, 0.0]), times), times):
            assert np.max(np.abs(psi - rabi_state(a, b, c, t))) <= 1e-10

    def test_diagonal_is_exact(self):
        """Diagonal generators only pick up phases."""
        H = SparseHamiltonian.from_entries(3, [0, 1, 2], [0, 1, 2], [1.0, -2.0, 0.5])
        psi0 = np.ones(3) / math.sqrt(3.0)
        (psi,) = propagate(H, psi0, [2.0])
        assert np.allclose(psi, np.exp(-2j * np.array([1.0, -2.0, 0.5])) * psi0, rtol=0.0, atol=1e-15)

    def test_norm_is_conserved(self):
        """Drift stays below 1e-8 on the oracle system."""
        H, _ = oracle_system()
        psi0 = np.zeros(H.size, dtype=complex)
        psi0[0] = 1.0
        for psi in propagate(H, psi0, np.linspace(0.0, 10.0, 21)):
            assert abs(np.linalg.norm(psi) - 1.0) <= 1e-8

    def test_matches_dense_exponential(self):
        """Krylov result equals scipy's dense expm on the oracle system."""
        H, _ = oracle_system()
        psi0 = np.zeros(H.size, dtype=complex)
        psi0[0] = 1.0
        (psi,) = propagate(H, psi0, [3.0])
        assert np.max(np.abs(psi - expm(-3j * H.to_dense()) @ psi0)) <= 1e-9

    def test_invalid_inputs(self):
        """Unnormalized vectors and decreasing times are rejected."""
        H = SparseHamiltonian.from_entries(2, [0, 1], [0, 1], [1.0, 2.0])
        with pytest.raises(ConfigurationError):
            propagate(H, np.array([1.0, 1.0]), [1.0])
        with pytest.raises(ConfigurationError):
            propagate(H, np.array([1.0, 0.0]), [2.0, 1.0])
        with pytest.raises(ConfigurationError):
            propagate(H, np.array([1.0, 0.0, 0.0]), [1.0])


class TestDeviationCurve:
    """Sector runs and their aggregate."""

    def test_zero_at_initial_time(self, line_spec):
        """Both evolutions start from the same state."""
        state = TracerState({(0,): 1.0}, BOX)
        result = deviation_curve(line_spec, state, [0.0, 1.0])
        assert result.at(0.0) == 0.0
        assert result.at(1.0) > 0.0

    def test_zero_potential(self):
        """A = 0 makes H and H^mf coincide."""
        spec = DynamicsSpec(LatticeSpec(1, BOX, 0.75), PotentialSpec(A=0.0), Truncation(2, 1.5 * SPACING, 2.0 * SPACING))
        result = deviation_curve(spec, TracerState({(0,): 1.0}, BOX), [0.5, 2.0])
        assert np.all(result.deviation == 0.0)

    def test_gauge_shift_does_not_change_deviation(self, line_spec):
        """A constant added to both generators leaves the deviation unchanged."""
        state = TracerState.normalized({(0,): 1.0, (1,): 0.5}, BOX)
        times = [0.5, 1.0, 2.0]
        plain = deviation_curve(line_spec, state, times)
        shifted = deviation_curve(line_spec, state, times, shift=7.5)
        assert np.allclose(plain.deviation, shifted.deviation, rtol=0.0, atol=1e-9)

    def test_aggregate_weights_sectors(self, line_spec):
        """Total is the |φ̂(K)|²-weighted root mean square over sectors."""
        state = TracerState.normalized({(0,): 1.0, (1,): 0.5}, BOX)
        result = deviation_curve(line_spec, state, [1.0])
        assert [s.sector for s in result.sectors] == ['0', '1']
        weights = np.array([0.8, 0.2])
        curves = np.array([s.at(1.0) for s in result.sectors])
        assert result.at(1.0) == pytest.approx(math.sqrt(float(weights @ curves ** 2)), rel=1e-12)
        assert np.allclose(result.norm, 1.0, atol=1e-8)

    def test_records_list_every_sector_then_total(self, line_spec):
        """Rows come per sector, then for the aggregate."""
        state = TracerState.normalized({(0,): 1.0, (1,): 0.5}, BOX)
        rows = deviation_curve(line_spec, state, [0.5, 1.0]).records(0.75, BOX)
        assert [r['sector'] for r in rows] == ['0', '0', '1', '1', 'total', 'total']

    def test_no_leakage_without_pairs(self):
        """P = 0 has no top layer."""
        spec = DynamicsSpec(LatticeSpec(1, BOX, 0.75), PotentialSpec(), Truncation(0, 0.0, 2.0 * SPACING))
        result = deviation_curve(spec, TracerState({(0,): 1.0}, BOX), [1.0])
        assert result.leakage[0] == 0.0

    def test_tracer_on_other_lattice(self, line_spec):
        """The tracer must share the gas lattice."""
        with pytest.raises(ConfigurationError):
            deviation_curve(line_spec, TracerState({(0,): 1.0}, 2.0 * BOX), [1.0])
