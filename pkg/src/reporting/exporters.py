#!/usr/bin/env python3
"""
Data Exporters
Writes result records to CSV and run metadata and claims to JSON.
"""

import json
import platform
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
import scipy

from src.utils import get_output_path, logger

# Seventeen significant digits reproduce every float exactly
FLOAT_FORMAT = '%.17g'


def package_versions() -> Dict[str, str]:
    """Versions of the interpreter and the numeric stack."""
    return {
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'pandas': pd.__version__,
    }


class DataExporter:
    """
    Export result records of one run.

    Handles:
    - CSV export with a fixed column order and 17-digit floats
    - JSON manifest (configuration echo, package versions, wall time)
    - JSON claims report
    """

    def __init__(self, base_dir: Path):
        """
        Initialize DataExporter.

        Args:
            base_dir: Output directory of the run
        """
        self.base_dir = Path(base_dir)
        logger.debug(f"DataExporter initialized with base_dir: {self.base_dir}")

    def to_csv(
        self,
        records: Iterable[Mapping[str, Any]],
        columns: Sequence[str],
        filename: str,
        subfolder: Optional[str] = None
    ) -> Path:
        """
        Export records to CSV.

        Args:
            records: Row mappings (extra keys are dropped)
            columns: Column order, e.g. SUM_RECORD_FIELDS
            filename: Output filename (e.g., "fluctuations_d2_continuum.csv")
            subfolder: Optional subfolder within base_dir

        Returns:
            Path: Path to exported file
        """
        try:
            output_path = get_output_path(filename=filename, base_dir=self.base_dir, subfolder=subfolder)
            df = pd.DataFrame(list(records), columns=list(columns))
            logger.info(f"Exporting {len(df)} rows to CSV: {output_path}")
            df.to_csv(output_path, index=False, encoding='utf-8', float_format=FLOAT_FORMAT,
                      lineterminator='\n')
            return output_path
        except Exception as e:
            logger.error(f"Failed to export to CSV: {e}")
            raise RuntimeError(f"Failed to export to CSV: {e}") from e

    def to_json(self, data: Any, filename: str, subfolder: Optional[str] = None) -> Path:
        """
        Export a JSON-serializable object with sorted keys.

        Args:
            data: Object to write
            filename: Output filename
            subfolder: Optional subfolder within base_dir

        Returns:
            Path: Path to exported file
        """
        try:
            output_path = get_output_path(filename=filename, base_dir=self.base_dir, subfolder=subfolder)
            text = json.dumps(data, indent=2, sort_keys=True, default=_json_default)
            output_path.write_text(text + '\n', encoding='utf-8')
            logger.info(f"Wrote JSON: {output_path}")
            return output_path
        except Exception as e:
            logger.error(f"Failed to export to JSON: {e}")
            raise RuntimeError(f"Failed to export to JSON: {e}") from e

    def write_manifest(
        self,
        command: str,
        config: Mapping[str, Any],
        files: List[Path],
        wall_time: float,
        filename: Optional[str] = None
    ) -> Path:
        """
        Write the run manifest.

        Args:
            command: Subcommand name
            config: Configuration echo (RunConfig.to_dict())
            files: Files written by the run
            wall_time: Elapsed seconds
            filename: Manifest name (default: manifest_<command>.json)

        Returns:
            Path: Path to the manifest
        """
        manifest = {
            'command': command,
            'config': dict(config),
            'versions': package_versions(),
            'files': [Path(f).name for f in files],
            'wall_time_s': wall_time,
        }
        return self.to_json(manifest, filename or f'manifest_{command}.json')

    def read_csv(self, filename: str) -> Optional[pd.DataFrame]:
        """Read a previously written CSV, or None when it does not exist."""
        path = self.base_dir / filename
        if not path.is_file():
            return None
        logger.debug(f"Reading {path}")
        return pd.read_csv(path, encoding='utf-8', dtype={'sector': str})


def _json_default(value: Any) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (Path, tuple)):
        return str(value) if isinstance(value, Path) else list(value)
    raise TypeError(f"Not JSON serializable: {type(value).__name__}")
