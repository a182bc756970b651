#!/usr/bin/env python3
"""
Fermi-Gas Tracer Laboratory
Main entry point: density scans, claim verification, truncated dynamics and
claims reports from earlier scans.

Exit codes:
- 0: success
- 1: at least one claim failed
- 2: usage or configuration error
- 3: numerical failure
- 4: resource limit exceeded
"""

import sys
import argparse
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from src.config import FGT_THREADS, print_config_summary
from src.config.run_config import LN_RHO, RunConfig
from src.core.definitions import EVOLUTION_RECORD_FIELDS, SCAN_QUANTITIES
from src.core.exceptions import ConfigurationError, FermiGasError
from src.reporting import (
    Claim,
    DataExporter,
    dynamics_filename,
    dynamics_records,
    report_claims,
    scan_filename,
    scan_records,
    verify_claims,
)
from src.utils import log_exception, logger, set_level

CLAIMS_FILE = 'claims.json'

Outcome = Tuple[List[Path], int]


# ============================================================================
# ARGUMENT TYPES
# ============================================================================

def _float_list(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(',') if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got: {text}")


def _claim_list(text: str) -> Tuple[str, ...]:
    return tuple(v.strip() for v in text.split(',') if v.strip())


def _shell_count(text: str):
    if text == LN_RHO:
        return LN_RHO
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or '{LN_RHO}', got: {text}")


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_scan(cfg: RunConfig, exporter: DataExporter) -> Outcome:
    """Sweep the configured quantity over the density grid and write one CSV."""
    records, columns = scan_records(cfg)
    path = exporter.to_csv(records, columns, scan_filename(cfg))
    print(f"✓ {len(records)} rows of {cfg.quantity} -> {path}")
    return [path], 0


def cmd_dynamics(cfg: RunConfig, exporter: DataExporter) -> Outcome:
    """Truncated-dynamics deviation curves at every grid density."""
    rows, results = dynamics_records(cfg)
    path = exporter.to_csv(rows, EVOLUTION_RECORD_FIELDS, dynamics_filename(cfg))
    for rho, result in results.items():
        print(f"  rho={rho:<10g} basis={result.basis_size:<8d} "
              f"deviation(t={result.times[-1]:g})={result.deviation[-1]:.6g}  "
              f"leakage={max(result.leakage):.3g}")
    print(f"✓ {len(rows)} rows -> {path}")
    return [path], 0


def _write_claims(claims: List[Claim], exporter: DataExporter) -> Outcome:
    path = exporter.to_json([c.to_record() for c in claims], CLAIMS_FILE)
    print("─" * 70)
    for claim in claims:
        mark = '✓' if claim.passed else '✗'
        print(f"{mark} claim {claim.id:>2}: {claim.verdict:<4}  {claim.anchor}")
    print("─" * 70)
    failed = [c.id for c in claims if not c.passed]
    if failed:
        logger.warning(f"Failed claims: {', '.join(failed)}")
    return [path], 1 if failed else 0


def cmd_verify(cfg: RunConfig, exporter: DataExporter) -> Outcome:
    """Compute and judge every selected claim."""
    return _write_claims(verify_claims(cfg), exporter)


def cmd_report(cfg: RunConfig, exporter: DataExporter) -> Outcome:
    """Judge the selected claims from the scan CSVs already in the output directory."""
    claims = report_claims(cfg, exporter)
    if not claims:
        raise ConfigurationError(f"No scan CSVs for the selected claims in {exporter.base_dir}")
    return _write_claims(claims, exporter)


COMMANDS: Dict[str, Callable[[RunConfig, DataExporter], Outcome]] = {
    'scan': cmd_scan,
    'verify': cmd_verify,
    'dynamics': cmd_dynamics,
    'report': cmd_report,
}


# ============================================================================
# CONFIGURATION
# ============================================================================

OVERRIDE_FIELDS = (
    'quantity',
    'dim',
    'mode',
    'rho_min',
    'rho_max',
    'rho_points',
    'L',
    'A',
    'R',
    'eps',
    'M',
    'q',
    't',
    'claims',
    'exponent_tolerance',
    'threads',
    'out',
    'seed',
)


def load_config(args: argparse.Namespace) -> RunConfig:
    """
    RunConfig from the optional TOML file with the command-line flags on top.

    Raises:
        ConfigurationError: If the file or any resulting field is invalid
    """
    overrides: Dict[str, Any] = {name: getattr(args, name, None) for name in OVERRIDE_FIELDS}
    if args.config:
        return RunConfig.load(Path(args.config), overrides)
    return RunConfig.from_dict({k: v for k, v in overrides.items() if v is not None})


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with the four subcommands sharing one set of flags."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH', help='TOML run configuration (flags override it)')
    common.add_argument('--dim', type=int, choices=(1, 2, 3), help='Spatial dimension')
    common.add_argument('--mode', choices=('lattice', 'continuum'), help='Finite lattice or continuum limit')
    common.add_argument('--rho-min', type=float, help='First density of the grid')
    common.add_argument('--rho-max', type=float, help='Last density of the grid')
    common.add_argument('--rho-points', type=int, help='Number of grid densities (>= 5)')
    common.add_argument('-L', type=float, dest='L', help='Box side (lattice mode and dynamics)')
    common.add_argument('--A', type=float, dest='A', help='Potential amplitude')
    common.add_argument('--R', type=float, dest='R', help='Potential range')
    common.add_argument('--eps', type=float, help='Transfer cut exponent, 0 < eps < 1/2')
    common.add_argument('--M', type=_shell_count, dest='M', help=f"Shell count or '{LN_RHO}'")
    common.add_argument('--q', type=int, help='Power of |F[v]| in the fluctuation sum')
    common.add_argument('--t', type=_float_list, help='Comma-separated times, e.g. 0,0.5,1')
    common.add_argument('--claims', type=_claim_list, help='Comma-separated claim ids (verify, report)')
    common.add_argument('--exponent-tolerance', type=float, help='Half-width of exponent claims')
    common.add_argument('--threads', type=int, help=f'Worker threads (default: FGT_THREADS={FGT_THREADS})')
    common.add_argument('--out', metavar='DIR', help='Output directory')
    common.add_argument('--seed', type=int, help='Random seed')
    common.add_argument('--log-level', choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'), help='Console log level')
    common.add_argument('--show-config', action='store_true', help='Print the .env settings before running')

    parser = argparse.ArgumentParser(
        description='Fermi-gas tracer laboratory: lattice sums, scaling fits and truncated dynamics',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py scan fluctuations --dim 2                 # Continuum sweep over 1e2..1e5
  python main.py scan shells --mode lattice -L 20 --rho-max 1000
  python main.py scan deviation1 --t 0,0.5,1 --threads 8
  python main.py dynamics --dim 1 -L 6.283185307179586 --rho-min 1 --rho-max 16 --rho-points 5
  python main.py verify --claims 1,9 --out output/verify
  python main.py report --out output                        # Refit scans already written
  python main.py verify --claims 9 --show-config             # Print .env settings first

Exit codes: 0 success, 1 failed claim, 2 usage, 3 numerical, 4 resource limit
        """
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    scan = subparsers.add_parser('scan', parents=[common], help='Sweep one quantity over a density grid')
    scan.add_argument('quantity', nargs='?', choices=SCAN_QUANTITIES, help='Quantity to sweep')
    subparsers.add_parser('verify', parents=[common], help='Compute and judge the acceptance claims')
    subparsers.add_parser('dynamics', parents=[common], help='Truncated-basis exact dynamics')
    subparsers.add_parser('report', parents=[common], help='Judge claims from written scan CSVs')
    return parser


# ============================================================================
# MAIN
# ============================================================================

def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main entry point for the Fermi-gas tracer laboratory.

    Returns:
        int: Process exit code
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        set_level(args.log_level)
    if args.show_config:
        print_config_summary()
        print()

    start = time.perf_counter()
    try:
        cfg = load_config(args)
        logger.info(f"Starting {args.command} (d={cfg.dim}, {cfg.mode}, threads={cfg.threads})")
        exporter = DataExporter(Path(cfg.out))
        files, status = COMMANDS[args.command](cfg, exporter)
        wall_time = time.perf_counter() - start
        manifest = exporter.write_manifest(args.command, cfg.to_dict(), files, wall_time)
        logger.info(f"{args.command} finished in {wall_time:.1f}s (manifest: {manifest})")
        return status

    except FermiGasError as e:
        logger.error(f"{args.command} failed")
        log_exception(logger, e)
        print(f"\n✗ Error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
