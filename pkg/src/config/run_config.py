#!/usr/bin/env python3
"""
Run Configuration
One frozen record holding every parameter of a scan, verify, dynamics or
report run, read from TOML and written back with tomli-w.

Every field is checked against the preconditions of the module that consumes
it before any computation starts.
"""

import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import tomli_w

from src.config.settings import FGT_THREADS, OUTPUT_DIR
from src.core.definitions import SCAN_QUANTITIES
from src.core.exceptions import ConfigurationError
from src.duhamel import Restriction
from src.dynamics import Truncation
from src.lattice import LatticeSpec
from src.potential import PotentialSpec
from src.scaling import RhoGrid
from src.sums import SumSpec

LN_RHO = 'lnrho'

CLAIM_IDS: Tuple[str, ...] = tuple(str(i) for i in range(1, 12))


@dataclass(frozen=True)
class RunConfig:
    """
    Parameters of one laboratory run.

    ``M`` is a shell count or 'lnrho' (⌊ln ρ⌋ per density); ``L`` is the box
    side used in lattice mode and by the truncated dynamics; ``claims``
    selects the acceptance checks run by verify and report.
    """
    dim: int = 2
    mode: str = 'continuum'
    quantity: str = 'fluctuations'
    rho_min: float = 100.0
    rho_max: float = 100000.0
    rho_points: int = 13
    L: Optional[float] = None
    A: float = 1.0
    R: float = 1.0
    eps: float = 0.1
    M: Union[int, str] = LN_RHO
    b: float = 0.5
    q: int = 2
    t: Tuple[float, ...] = (1.0,)
    restriction: str = 'small'
    kappa: Optional[float] = None
    P0: float = 1.0
    energy_tolerance: float = 1e-6
    tracer_L: float = 4.0 * math.pi
    tracer_width: float = 1.0
    tracer_cutoff: float = 3.0
    tracer_center: Tuple[float, ...] = ()
    pairs: int = 2
    particle_cutoff: float = 1.0
    recoil_cutoff: float = 2.0
    claims: Tuple[str, ...] = CLAIM_IDS
    exponent_tolerance: Optional[float] = None
    out: str = str(OUTPUT_DIR)
    threads: int = FGT_THREADS
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 't', tuple(float(v) for v in self.t))
        object.__setattr__(self, 'tracer_center', tuple(float(v) for v in self.tracer_center))
        object.__setattr__(self, 'claims', tuple(str(c) for c in self.claims))
        if isinstance(self.M, str) and self.M != LN_RHO:
            try:
                object.__setattr__(self, 'M', int(self.M))
            except ValueError:
                raise ConfigurationError(f"M must be a positive integer or '{LN_RHO}', got: {self.M!r}")
        self.validate()

    # ------------------------------------------------------------------------
    # Validation
    # ------------------------------------------------------------------------

    def validate(self) -> None:
        """
        Check every field by building the objects that will consume it.

        Raises:
            ConfigurationError: On the first invalid field
        """
        if self.quantity not in SCAN_QUANTITIES:
            raise ConfigurationError(f"quantity must be one of {SCAN_QUANTITIES}, got: {self.quantity}")
        if self.mode == 'lattice' and self.L is None:
            raise ConfigurationError("Lattice mode needs the box side L")
        if not self.t or any(b < a for a, b in zip(self.t, self.t[1:])) or self.t[0] < 0.0:
            raise ConfigurationError(f"t must be a nonempty nondecreasing list of times >= 0, got: {self.t}")
        if self.tracer_center and len(self.tracer_center) != self.dim:
            raise ConfigurationError(f"tracer_center {self.tracer_center} does not match dim={self.dim}")
        for name in ('tracer_L', 'tracer_width', 'tracer_cutoff', 'P0'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ConfigurationError(f"{name} must be positive and finite, got: {value}")
        if self.kappa is not None and not self.kappa > 0.0:
            raise ConfigurationError(f"kappa must be positive, got: {self.kappa}")
        if self.exponent_tolerance is not None and not self.exponent_tolerance > 0.0:
            raise ConfigurationError(f"exponent_tolerance must be positive, got: {self.exponent_tolerance}")
        if not self.claims:
            raise ConfigurationError("The claims selection is empty")
        unknown = [c for c in self.claims if c not in CLAIM_IDS]
        if unknown:
            raise ConfigurationError(f"Unknown claim ids {unknown} (expected a subset of {list(CLAIM_IDS)})")
        if self.threads < 1:
            raise ConfigurationError(f"threads must be >= 1, got: {self.threads}")

        grid = RhoGrid.geometric(self.rho_min, self.rho_max, self.rho_points)
        potential = PotentialSpec(R=self.R, A=self.A)
        lattice = LatticeSpec(self.dim, self.L if self.L is not None else 1.0, grid.values[0])
        SumSpec(lattice=lattice, potential=potential, eps=self.eps, M=self.shell_count, q=self.q,
                mode=self.mode, b=self.b, threads=self.threads)
        Restriction.parse(self.restriction)
        Truncation(self.pairs, self.particle_cutoff, self.recoil_cutoff)
        if self.energy_tolerance < 0.0:
            raise ConfigurationError(f"energy_tolerance must be nonnegative, got: {self.energy_tolerance}")

    @property
    def shell_count(self) -> Optional[int]:
        """M as SumSpec expects it (None for 'lnrho')."""
        return None if self.M == LN_RHO else int(self.M)

    # ------------------------------------------------------------------------
    # TOML
    # ------------------------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        """Plain TOML-ready mapping; None fields are left out."""
        out: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'RunConfig':
        """
        Build from a mapping, rejecting unknown keys.

        Raises:
            ConfigurationError: On unknown keys or invalid values
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys: {unknown}")
        values = dict(data)
        for name in ('t', 'tracer_center', 'claims'):
            if name in values:
                raw = values[name]
                values[name] = tuple(raw) if isinstance(raw, (list, tuple)) else (raw,)
        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigurationError(f"Invalid configuration: {e}") from e

    def emit(self) -> str:
        """TOML text of this configuration."""
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def parse(cls, text: str, overrides: Optional[Mapping[str, Any]] = None) -> 'RunConfig':
        """Configuration from TOML text; non-None overrides replace file values."""
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError(f"Invalid TOML: {e}") from e
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: Path, overrides: Optional[Mapping[str, Any]] = None) -> 'RunConfig':
        """
        Configuration from a TOML file.

        Args:
            path: TOML file
            overrides: Field values that win over the file (None entries are ignored)

        Raises:
            ConfigurationError: If the file is missing or invalid
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"Configuration file not found: {path}")
        return cls.parse(path.read_text(encoding='utf-8'), overrides)

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.emit(), encoding='utf-8')
        return path

    def with_overrides(self, overrides: Mapping[str, Any]) -> 'RunConfig':
        """Copy with the given fields replaced; None values are ignored."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        if not changes:
            return self
        try:
            return replace(self, **changes)
        except TypeError as e:
            raise ConfigurationError(f"Invalid override: {e}") from e
