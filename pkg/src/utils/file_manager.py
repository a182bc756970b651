#!/usr/bin/env python3
"""
File Management Utilities
Handles output directory creation and result path generation.
"""

from pathlib import Path
from typing import Optional

from src.utils.logger import logger


def ensure_directory(path: Path) -> Path:
    """
    Ensure directory exists, create if missing.

    Args:
        path: Directory path to ensure exists

    Returns:
        Path: The directory path (created if needed)

    Raises:
        RuntimeError: If the directory cannot be created
    """
    try:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        logger.debug(f"Ensured directory exists: {path}")
        return path
    except Exception as e:
        logger.error(f"Failed to create directory {path}: {e}")
        raise RuntimeError(f"Failed to create directory: {e}") from e


def get_output_path(
    filename: str,
    base_dir: Path,
    subfolder: Optional[str] = None
) -> Path:
    """
    Build the path of a result file inside the run's output directory.

    Paths carry no timestamps: re-running a configuration overwrites the same
    files, which is what the determinism check compares.

    Args:
        filename: File name (e.g., "fluctuations.csv")
        base_dir: Output directory of the run
        subfolder: Optional subfolder within base_dir

    Returns:
        Path: Full path for the result file

    Example:
        get_output_path("fluctuations.csv", Path("output"))
        -> output/fluctuations.csv
    """
    try:
        base_path = Path(base_dir)
        if subfolder:
            base_path = base_path / subfolder
        ensure_directory(base_path)
        full_path = base_path / filename
        logger.debug(f"Generated output path: {full_path}")
        return full_path
    except Exception as e:
        logger.error(f"Failed to generate output path: {e}")
        raise RuntimeError(f"Failed to generate output path: {e}") from e
