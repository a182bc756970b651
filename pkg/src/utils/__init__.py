"""Utility package for the Fermi-gas tracer laboratory."""

from .logger import logger, setup_logger, log_exception, set_level
from .file_manager import ensure_directory, get_output_path
from .parallel import parallel_map, chunk_ranges, deterministic_sum

__all__ = [
    'logger',
    'setup_logger',
    'log_exception',
    'set_level',
    'ensure_directory',
    'get_output_path',
    'parallel_map',
    'chunk_ranges',
    'deterministic_sum',
]
