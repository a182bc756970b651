#!/usr/bin/env python3
"""
Run Orchestration
Turns a RunConfig into module specifications and result records for the
scan and dynamics commands.
"""

import math
from typing import Dict, List, Optional, Tuple

from src.config.run_config import RunConfig
from src.core.definitions import DEVIATION_RECORD_FIELDS, EVOLUTION_RECORD_FIELDS, SUM_RECORD_FIELDS
from src.core.exceptions import ConfigurationError
from src.duhamel import (
    Restriction,
    TracerState,
    excitation_region_measure,
    first_order_deviation,
    stationary_split,
)
from src.dynamics import DynamicsSpec, EvolutionResult, Truncation, deviation_curve
from src.lattice import LatticeSpec, Momentum
from src.potential import PotentialSpec
from src.scaling import RhoGrid, appendix_b_value
from src.sums import SumSpec, sum_record, sum_records
from src.utils.logger import logger
from src.utils.parallel import parallel_map

SUM_QUANTITIES = ('fluctuations', 'tail', 'shells', 'ere', 'convolution')

Record = Dict[str, object]


# ============================================================================
# SPECIFICATIONS FROM CONFIG
# ============================================================================

def rho_grid(cfg: RunConfig) -> RhoGrid:
    return RhoGrid.geometric(cfg.rho_min, cfg.rho_max, cfg.rho_points)


def potential_spec(cfg: RunConfig) -> PotentialSpec:
    return PotentialSpec(R=cfg.R, A=cfg.A)


def sum_spec(cfg: RunConfig, rho: float, threads: int = 1) -> SumSpec:
    """SumSpec at one density; the box side only matters in lattice mode."""
    L = cfg.L if cfg.mode == 'lattice' else 1.0
    return SumSpec(lattice=LatticeSpec(cfg.dim, L, rho), potential=potential_spec(cfg), eps=cfg.eps,
                   M=cfg.shell_count, q=cfg.q, mode=cfg.mode, b=cfg.b, threads=threads)


def tracer_state(cfg: RunConfig, L: Optional[float] = None) -> TracerState:
    """Gaussian tracer packet on the lattice of side L (default: tracer_L)."""
    return TracerState.gaussian(L if L is not None else cfg.tracer_L, cfg.dim,
                                center=cfg.tracer_center or None, width=cfg.tracer_width,
                                cutoff=cfg.tracer_cutoff)


def dynamics_spec(cfg: RunConfig, rho: float, potential: Optional[PotentialSpec] = None) -> DynamicsSpec:
    if cfg.L is None:
        raise ConfigurationError("The truncated dynamics needs the box side L")
    return DynamicsSpec(
        lattice=LatticeSpec(cfg.dim, cfg.L, rho),
        potential=potential or potential_spec(cfg),
        truncation=Truncation(cfg.pairs, cfg.particle_cutoff, cfg.recoil_cutoff),
        threads=cfg.threads,
    )


def scan_filename(cfg: RunConfig) -> str:
    return f'{cfg.quantity}_d{cfg.dim}_{cfg.mode}.csv'


def dynamics_filename(cfg: RunConfig) -> str:
    return f'dynamics_d{cfg.dim}.csv'


# ============================================================================
# SCAN RECORDS
# ============================================================================

def _region_momentum(spec: SumSpec, P0: float):
    """Tracer momentum of modulus ≈ P0 along the first axis."""
    if spec.mode == 'continuum':
        return P0
    h = 2.0 * math.pi / spec.lattice.L
    n = max(1, int(round(P0 / h)))
    return Momentum((n,) + (0,) * (spec.d - 1), spec.lattice.L)


def deviation_records(cfg: RunConfig, spec: SumSpec, state: TracerState) -> List[Record]:
    """First-order deviation rows at every time, plus the stationary split when kappa is set."""
    restriction = Restriction.parse(cfg.restriction)
    base = {'d': spec.d, 'rho': spec.rho, 'L': spec.lattice.L if spec.mode == 'lattice' else None,
            'eps': spec.eps}
    rows = []
    for t in cfg.t:
        value = first_order_deviation(spec, state, t, restriction)
        rows.append(dict(base, t=t, restriction=restriction.label, value=float(value),
                         est_error=value.est_error))
        if cfg.kappa is not None and t > 0.0:
            split = stationary_split(spec, state, t, cfg.kappa)
            for label in ('stationary', 'nonstationary', 'bound', 'coarse_bound'):
                rows.append(dict(base, t=t, restriction=label, value=getattr(split, label), est_error=0.0))
    return [{field: row[field] for field in DEVIATION_RECORD_FIELDS} for row in rows]


def point_records(cfg: RunConfig, rho: float, threads: int = 1) -> List[Record]:
    """Records of the configured quantity at one density."""
    spec = sum_spec(cfg, rho, threads)
    if cfg.quantity in SUM_QUANTITIES:
        return sum_records(spec, cfg.quantity)
    if cfg.quantity == 'appendixB':
        return [sum_record(spec, 'appendixB', appendix_b_value(spec))]
    if cfg.quantity == 'region':
        value = excitation_region_measure(spec, _region_momentum(spec, cfg.P0), cfg.energy_tolerance)
        return [sum_record(spec, 'region', value)]
    if cfg.quantity == 'deviation1':
        return deviation_records(cfg, spec, tracer_state(cfg))
    raise ConfigurationError(f"Unknown scan quantity: {cfg.quantity}")


def scan_records(cfg: RunConfig) -> Tuple[List[Record], List[str]]:
    """
    Records of the configured quantity over the density grid.

    Continuum grid points run in parallel; lattice points run one after
    another with a threaded engine each.

    Returns:
        Tuple[List[Record], List[str]]: Rows in grid order and their columns
    """
    grid = rho_grid(cfg)
    logger.info(f"Scan {cfg.quantity} d={cfg.dim} ({cfg.mode}) over {len(grid)} densities")
    if cfg.mode == 'continuum':
        chunks = parallel_map(lambda rho: point_records(cfg, rho), list(grid.values), cfg.threads)
    else:
        chunks = [point_records(cfg, rho, cfg.threads) for rho in grid.values]
    columns = DEVIATION_RECORD_FIELDS if cfg.quantity == 'deviation1' else SUM_RECORD_FIELDS
    return [row for chunk in chunks for row in chunk], list(columns)


# ============================================================================
# DYNAMICS RECORDS
# ============================================================================

def dynamics_records(cfg: RunConfig) -> Tuple[List[Record], Dict[float, EvolutionResult]]:
    """
    Truncated-dynamics curves at every grid density on the box of side L.

    Returns:
        Tuple: Rows with EVOLUTION_RECORD_FIELDS and the results per density
    """
    grid = rho_grid(cfg)
    state = tracer_state(cfg, cfg.L)
    rows: List[Record] = []
    results: Dict[float, EvolutionResult] = {}
    for rho in grid.values:
        result = deviation_curve(dynamics_spec(cfg, rho), state, cfg.t)
        results[rho] = result
        rows.extend({field: row[field] for field in EVOLUTION_RECORD_FIELDS}
                    for row in result.records(rho, cfg.L))
    return rows, results
