"""
Tests for the TOML run configuration.
"""

import pytest

from src.config.run_config import CLAIM_IDS, LN_RHO, RunConfig
from src.core.exceptions import ConfigurationError


class TestRunConfig:
    """Construction, validation and TOML round trips."""

    def test_defaults(self):
        """Defaults describe the 10² .. 10⁵ continuum sweep in d = 2."""
        cfg = RunConfig()
        assert (cfg.dim, cfg.mode, cfg.rho_points) == (2, 'continuum', 13)
        assert cfg.M == LN_RHO
        assert cfg.shell_count is None
        assert cfg.claims == CLAIM_IDS

    def test_emit_parse_round_trip(self):
        """parse(emit(cfg)) reproduces cfg."""
        cfg = RunConfig(dim=3, mode='lattice', L=20.0, M=4, t=(0.0, 0.5, 1.0), claims=('1', '7'),
                        kappa=0.1, tracer_center=(1.0, 0.0, 0.0), exponent_tolerance=0.05)
        assert RunConfig.parse(cfg.emit()) == cfg

    def test_save_and_load(self, tmp_path):
        """Saved files load back unchanged."""
        cfg = RunConfig(quantity='shells', eps=0.2, threads=2)
        path = cfg.save(tmp_path / 'nested' / 'run.toml')
        assert RunConfig.load(path) == cfg

    def test_unknown_key_rejected(self):
        """Typos in a file are configuration errors."""
        with pytest.raises(ConfigurationError, match='rho_maxx'):
            RunConfig.parse('rho_maxx = 10.0\n')

    def test_invalid_toml(self):
        """Malformed TOML is a configuration error."""
        with pytest.raises(ConfigurationError):
            RunConfig.parse('dim = = 2\n')

    def test_missing_file(self, tmp_path):
        """A missing file is reported, not raised as OSError."""
        with pytest.raises(ConfigurationError):
            RunConfig.load(tmp_path / 'absent.toml')

    def test_overrides_win_over_file(self):
        """Non-None overrides replace file values; None leaves them."""
        cfg = RunConfig.parse('mode = "lattice"\ndim = 1\n', {'L': 12.0, 'dim': None, 'eps': 0.2})
        assert (cfg.mode, cfg.L, cfg.dim, cfg.eps) == ('lattice', 12.0, 1, 0.2)

    def test_with_overrides(self):
        """Copies with replaced fields are validated again."""
        cfg = RunConfig().with_overrides({'rho_points': 7, 'seed': None})
        assert cfg.rho_points == 7
        with pytest.raises(ConfigurationError):
            RunConfig().with_overrides({'rho_points': 3})

    def test_scalar_lists_accepted(self):
        """A single time or claim may be written without brackets."""
        cfg = RunConfig.parse('t = 2.0\nclaims = "9"\n')
        assert cfg.t == (2.0,)
        assert cfg.claims == ('9',)

    @pytest.mark.parametrize("kwargs", [
        {'claims': ()},
        {'claims': ('12',)},
        {'mode': 'lattice'},
        {'quantity': 'energy'},
        {'t': (1.0, 0.5)},
        {'t': (-1.0,)},
        {'eps': 0.5},
        {'M': 'log'},
        {'M': 0},
        {'rho_points': 4},
        {'rho_min': 1e3, 'rho_max': 1e2},
        {'pairs': 3},
        {'restriction': 'medium'},
        {'threads': 0},
        {'exponent_tolerance': 0.0},
        {'tracer_center': (1.0, 0.0, 0.0)},
        {'mode': 'lattice', 'L': 1.5},
    ])
    def test_invalid_fields(self, kwargs):
        """Every invalid field fails before any computation starts."""
        with pytest.raises(ConfigurationError):
            RunConfig(**kwargs)

    def test_shell_count_from_string(self):
        """M read as text becomes an integer."""
        assert RunConfig(M='5').shell_count == 5
