"""First-order Duhamel deviation, tracer kicks and the excitation region."""

from .tracer import (
    NORM_TOLERANCE,
    SERIES_SWITCH,
    TracerState,
    PhaseKernel,
    apply_kick,
    oscillatory_time_integral,
    oscillatory_weight,
    kick_derivative_norm,
    kick_derivative_bound,
)
from .deviation import (
    DEVIATION_RTOL,
    Restriction,
    StationarySplit,
    first_order_deviation,
    stationary_split,
    excitation_region_measure,
)

__all__ = [
    'NORM_TOLERANCE',
    'SERIES_SWITCH',
    'TracerState',
    'PhaseKernel',
    'apply_kick',
    'oscillatory_time_integral',
    'oscillatory_weight',
    'kick_derivative_norm',
    'kick_derivative_bound',
    'DEVIATION_RTOL',
    'Restriction',
    'StationarySplit',
    'first_order_deviation',
    'stationary_split',
    'excitation_region_measure',
]
