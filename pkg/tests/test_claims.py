"""
Tests for the acceptance-claim judges and the report refits.
"""

import math

import numpy as np
import pytest

from src.config.run_config import RunConfig
from src.core.definitions import CLAIM_FIELDS, EVOLUTION_RECORD_FIELDS, SUM_RECORD_FIELDS
from src.reporting import DataExporter, report_claims
from src.reporting.claims import (
    EXPONENT_TOLERANCE,
    compute_claim,
    judge_agreement,
    judge_appendix_b,
    judge_determinism,
    judge_deviation,
    judge_dynamics,
    judge_fluctuation,
    judge_oracle,
    judge_recollision,
    judge_region,
    judge_shells,
    judge_tail,
    rabi_state,
    shell_ratios,
)

GRID = [100.0 * 10.0 ** (k / 4.0) for k in range(13)]


def law(exponent, prefactor=1.0):
    return [(rho, prefactor * rho ** exponent) for rho in GRID]


def sum_rows(quantity, samples, d=2, eps=0.1):
    return [{'mode': 'continuum', 'd': d, 'rho': rho, 'L': None, 'eps': eps, 'M': 4, 'q': 2,
             'quantity': quantity, 'value': value, 'est_error': 0.0} for rho, value in samples]


class TestJudges:
    """Verdicts on synthetic numbers."""

    def test_fluctuation_exponents(self):
        """Exact (d-1)/d laws pass; a 1e-6 tolerance rejects a 0.01 offset."""
        samples = {1: law(0.0, 0.3), 2: law(0.5), 3: law(2.0 / 3.0)}
        claim = judge_fluctuation(samples)
        assert claim.passed
        assert claim.tolerance == EXPONENT_TOLERANCE
        off = {2: law(0.51)}
        assert judge_fluctuation(off).passed
        assert not judge_fluctuation(off, 1e-6).passed

    def test_agreement(self):
        """Monotone convergence ending within 1% passes."""
        assert judge_agreement(1.0, {12.5: 1.2, 25.0: 1.05, 50.0: 1.02, 100.0: 1.005}).passed
        assert not judge_agreement(1.0, {12.5: 1.2, 25.0: 1.3, 50.0: 1.02, 100.0: 1.005}).passed
        assert not judge_agreement(1.0, {12.5: 1.2, 25.0: 1.1, 50.0: 1.05, 100.0: 1.02}).passed

    def test_tail(self):
        """Exponent <= -2 and a negligible ratio pass."""
        assert judge_tail(law(-2.5), 1e-5).passed
        assert not judge_tail(law(-2.5), 1e-2).passed
        assert not judge_tail(law(-1.5), None).passed

    def test_recollision(self):
        """Slow positive growth passes, fast growth fails."""
        assert judge_recollision(law(0.1, 0.05), 0.1).passed
        assert not judge_recollision(law(0.5, 0.05), 0.1).passed
        negative = [(rho, -1.0) for rho in GRID]
        assert not judge_recollision(negative, 0.1).passed

    def test_shell_ratios_and_judge(self):
        """Counts built from the normalization give unit ratios and pass."""
        eps, b, M = 0.1, 0.5, 4
        c = 0.5 / (b + eps)
        rows = []
        for rho in GRID[:5]:
            scale = rho ** (-0.5 + eps) * (rho ** (1.0 / (c * M)) - rho ** (1.0 / (2.0 * c * M)))
            counts = [rho ** -0.5] + [scale * rho ** ((n - 1) / (c * M)) for n in range(1, M + 1)]
            assert shell_ratios(rho, M, counts, eps, b) == pytest.approx([1.0] * M)
            rows.append((rho, M, counts))
        assert judge_shells(rows, eps, b).passed
        spread = [(rho, M, counts[:1] + [100.0 * counts[1]] + counts[2:]) for rho, M, counts in rows]
        assert not judge_shells(spread, eps, b).passed

    def test_deviation(self):
        """A strict decrease by at least 3 with the split bound holding passes."""
        assert judge_deviation([(1e2, 1.0), (1e3, 0.5), (1e4, 0.2)], [True] * 3).passed
        assert not judge_deviation([(1e2, 1.0), (1e3, 0.9), (1e4, 0.8)]).passed
        assert not judge_deviation([(1e2, 1.0), (1e3, 0.5), (1e4, 0.2)], [True, False, True]).passed

    def test_appendix_b(self):
        """Logarithmic growth passes, a genuine power does not."""
        assert judge_appendix_b([(rho, 0.3 + 0.02 * math.log(rho)) for rho in GRID]).passed
        assert not judge_appendix_b(law(0.5)).passed

    def test_appendix_b_with_b_scan(self):
        """Slopes per b are reported; sums falling with b fail the check."""
        base = [(rho, 0.3 + 0.02 * math.log(rho)) for rho in GRID]
        wider = [(rho, v + 0.1) for rho, v in base]
        claim = judge_appendix_b(base, scan={0.25: base, 0.5: wider})
        assert claim.passed
        assert set(claim.measured['log_slope_by_b']) == {'0.25', '0.5'}
        assert claim.measured['log_slope_by_b']['0.5'] == pytest.approx(0.02, rel=1e-10)
        assert not judge_appendix_b(base, scan={0.25: wider, 0.5: base}).passed

    def test_region(self):
        """Exponent -1/2 within the tolerance."""
        assert judge_region(law(-0.5, 0.2)).passed
        assert not judge_region(law(-0.3, 0.2)).passed

    def test_oracle(self):
        """All three errors must be below their thresholds."""
        assert judge_oracle(1e-13, 1e-12, 1e-12).passed
        assert not judge_oracle(1e-6, 1e-12, 1e-12).passed
        assert not judge_oracle(1e-13, 1e-12, 1e-6).passed

    def test_dynamics(self):
        """Three strictly decreasing values and a vanishing free deviation."""
        samples = [(1.0, 0.3), (2.0, 0.2), (4.0, 0.1)]
        assert judge_dynamics(samples, 0.0).passed
        assert not judge_dynamics(samples, 1e-3).passed
        assert not judge_dynamics(samples[:2]).passed

    def test_determinism_and_record(self):
        """Records carry exactly the claim columns."""
        claim = judge_determinism(True, ['a.csv'])
        assert claim.passed
        assert list(claim.to_record()) == CLAIM_FIELDS
        assert not judge_determinism(False, ['a.csv']).passed


class TestComputedClaims:
    """Claims computed from scratch."""

    def test_oracle_claim(self):
        """The dynamics oracles pass."""
        claim = compute_claim('9', RunConfig(claims=('9',)))
        assert claim.passed
        assert claim.measured['matrix_error'] <= 1e-10

    def test_rabi_state_is_normalized(self):
        """The closed form is unitary."""
        for t in np.linspace(0.0, 10.0, 11):
            assert np.linalg.norm(rabi_state(0.3, 0.7, -0.2, t)) == pytest.approx(1.0, abs=1e-14)

    def test_unknown_claim(self):
        """Ids outside 1..11 are rejected."""
        with pytest.raises(ValueError):
            compute_claim('12', RunConfig())

    @pytest.mark.slow
    def test_determinism_claim(self):
        """Two scans write identical bytes."""
        assert compute_claim('11', RunConfig(claims=('11',))).passed


class TestReport:
    """Refits from CSVs already on disk."""

    def test_report_uses_available_scans(self, tmp_path):
        """Claims with data are judged; the rest are skipped."""
        exporter = DataExporter(tmp_path)
        exporter.to_csv(sum_rows('fluctuation', law(0.5, 0.7)), SUM_RECORD_FIELDS, 'fluctuations_d2_continuum.csv')
        exporter.to_csv(sum_rows('region', law(-0.5, 0.1)), SUM_RECORD_FIELDS, 'region_d2_continuum.csv')
        cfg = RunConfig(claims=('1', '8', '9', '3'), out=str(tmp_path))
        claims = report_claims(cfg, exporter)
        assert [c.id for c in claims] == ['1', '8']
        assert all(c.passed for c in claims)

    def test_report_tolerance_override(self, tmp_path):
        """A tiny exponent tolerance fails a slightly-off refit."""
        exporter = DataExporter(tmp_path)
        exporter.to_csv(sum_rows('fluctuation', law(0.51)), SUM_RECORD_FIELDS, 'fluctuations_d2_continuum.csv')
        cfg = RunConfig(claims=('1',), exponent_tolerance=1e-6, out=str(tmp_path))
        (claim,) = report_claims(cfg, exporter)
        assert not claim.passed

    def test_report_dynamics(self, tmp_path):
        """The aggregate rows at t = 1 feed the dynamics claim."""
        exporter = DataExporter(tmp_path)
        rows = []
        for rho, value in [(1.0, 0.3), (2.0, 0.2), (4.0, 0.1)]:
            for sector, v in (('0', value), ('total', value)):
                rows.append({'rho': rho, 'L': 2.0 * math.pi, 'sector': sector, 'basis_size': 10, 't': 1.0,
                             'deviation': v, 'norm': 1.0, 'leakage': 0.0})
        exporter.to_csv(rows, EVOLUTION_RECORD_FIELDS, 'dynamics_d1.csv')
        (claim,) = report_claims(RunConfig(claims=('10',), out=str(tmp_path)), exporter)
        assert claim.passed

    def test_report_without_data(self, tmp_path):
        """No CSVs, no claims."""
        assert report_claims(RunConfig(out=str(tmp_path)), DataExporter(tmp_path)) == []
