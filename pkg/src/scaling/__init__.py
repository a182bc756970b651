"""Density sweeps, scaling fits and the three-dimensional shell sum."""

from .scaling import (
    MIN_GRID_POINTS,
    REPORT_QUANTITIES,
    FLUCTUATION_TARGETS,
    RhoGrid,
    ScalingFit,
    fit_power_law,
    fit_log_law,
    continuum_spec,
    evaluate_quantity,
    sweep,
    dimension_scaling_report,
    appendix_b_value,
    appendix_b_sum,
    appendix_b_scan,
)

__all__ = [
    'MIN_GRID_POINTS',
    'REPORT_QUANTITIES',
    'FLUCTUATION_TARGETS',
    'RhoGrid',
    'ScalingFit',
    'fit_power_law',
    'fit_log_law',
    'continuum_spec',
    'evaluate_quantity',
    'sweep',
    'dimension_scaling_report',
    'appendix_b_value',
    'appendix_b_sum',
    'appendix_b_scan',
]
