#!/usr/bin/env python3
"""
Laboratory Logging
One 'fermi_gas_tracer' logger shared by every module: a DEBUG-level file log
under FGT_LOG_DIR for the adaptive decisions (tail cutoffs, basis sizes,
Krylov dimensions) and a console stream at FGT_LOG_LEVEL for run progress.
CSV and JSON results never go through it.
"""

import logging
import sys
from pathlib import Path
from typing import Optional

try:
    from src.config import LOG_FILE, LOG_LEVEL
except ImportError:
    # Outside the package (e.g. a copied script)
    LOG_FILE = Path('logs/fermi_gas_tracer.log')
    LOG_LEVEL = 'INFO'

LOGGER_NAME = 'fermi_gas_tracer'

# ============================================================================
# LOGGER CONFIGURATION
# ============================================================================

def setup_logger(
    name: str = LOGGER_NAME,
    log_file: Optional[Path] = None,
    log_level: str = 'INFO',
    console_output: bool = True
) -> logging.Logger:
    """
    Laboratory logger with a full-detail file handler and a console handler.

    Worker threads of a scan log through the same instance; handlers are
    attached once, so repeated calls return the configured logger.

    Args:
        name: Logger name
        log_file: Log file (default: FGT_LOG_DIR/fermi_gas_tracer.log)
        log_level: Console level name
        console_output: Attach the stdout handler

    Returns:
        logging.Logger: The configured logger
    """
    if log_file is None:
        log_file = LOG_FILE
    level = getattr(logging, log_level.upper(), logging.INFO)

    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)
    if logger.handlers:
        return logger

    formatter = logging.Formatter(
        fmt='%(asctime)s | %(levelname)-8s | %(name)s | %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    try:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    except OSError as e:
        print(f"Warning: no log file at {log_file}: {e}", file=sys.stderr)

    if console_output:
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    return logger


def set_level(log_level: str) -> None:
    """Console level from --log-level; the file keeps DEBUG."""
    level = getattr(logging, log_level.upper(), logging.INFO)
    for handler in logger.handlers:
        if not isinstance(handler, logging.FileHandler):
            handler.setLevel(level)


# ============================================================================
# DEFAULT LOGGER INSTANCE
# ============================================================================

logger = setup_logger(
    name=LOGGER_NAME,
    log_file=LOG_FILE,
    log_level=LOG_LEVEL,
    console_output=True
)


# ============================================================================
# UTILITY FUNCTIONS
# ============================================================================

def log_exception(logger_instance: logging.Logger, exception: Exception):
    """
    Log a laboratory failure as one error line.

    Numerical failures add the tolerance or bound they reached and
    configuration-type failures their exit code; the traceback is only
    attached at DEBUG.

    Args:
        logger_instance: Logger to write to
        exception: The failure
    """
    message = f"{type(exception).__name__}: {exception}"
    achieved = getattr(exception, 'achieved', None)
    if achieved is not None:
        message += f" (achieved {achieved:.3g})"
    exit_code = getattr(exception, 'exit_code', None)
    if exit_code is not None:
        message += f" [exit {exit_code}]"
    verbose = any(h.level <= logging.DEBUG for h in logger_instance.handlers
                  if not isinstance(h, logging.FileHandler))
    logger_instance.error(message, exc_info=verbose)
