"""Reporting package: run orchestration, CSV/JSON export and the claims report."""

from .exporters import DataExporter, package_versions
from .runs import (
    SUM_QUANTITIES,
    scan_records,
    dynamics_records,
    scan_filename,
    dynamics_filename,
)
from .claims import Claim, verify_claims, report_claims

__all__ = [
    'DataExporter',
    'package_versions',
    'SUM_QUANTITIES',
    'scan_records',
    'dynamics_records',
    'scan_filename',
    'dynamics_filename',
    'Claim',
    'verify_claims',
    'report_claims',
]
