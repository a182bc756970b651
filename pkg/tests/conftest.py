"""
Pytest fixtures shared by the laboratory tests.
"""

import math
import sys
from pathlib import Path

import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.duhamel import TracerState
from src.lattice import LatticeSpec, build_fermi_sea
from src.potential import FourierTable, PotentialSpec


@pytest.fixture(scope="session")
def bump():
    """Unit bump potential (R = 1, A = 1)."""
    return PotentialSpec(R=1.0, A=1.0)


@pytest.fixture(scope="session")
def small_lattice():
    """d = 2, L = 5, ρ = 1: a 21-particle sea that still fits the unit bump."""
    return LatticeSpec(2, 5.0, 1.0)


@pytest.fixture(scope="session")
def small_sea(small_lattice):
    """Fermi sea of ``small_lattice``."""
    return build_fermi_sea(small_lattice)


@pytest.fixture(scope="session")
def bump_table_2d(bump):
    """Fourier table of the unit bump in two dimensions."""
    return FourierTable(bump, 2)


@pytest.fixture(scope="session")
def line_box():
    """Box side 2π, so one-dimensional lattice momenta are integers."""
    return 2.0 * math.pi


@pytest.fixture(scope="session")
def tracer_2d():
    """Default Gaussian tracer in d = 2 on a box of side 4π."""
    return TracerState.gaussian(4.0 * math.pi, 2, width=1.0, cutoff=3.0)
