"""CSV output for experiment tables.

Sweeps produce pandas tables (per-run rows, quartile summaries, the prior
grid surface, ensemble traces); each is written as one CSV file.
"""

import logging
from pathlib import Path
from typing import Dict

import pandas as pd

from ..core.errors import OutputPermissionError

# Tables whose index carries data (the σ_a² rows of the grid surface)
INDEXED_TABLES = {"prior_grid_surface"}


def write_table_csv(
    frame: pd.DataFrame,
    output_dir: str,
    name: str,
    quiet: bool = False,
) -> Path:
    """Write one table as ``<output_dir>/<name>.csv``.

    Args:
        frame: Table to write
        output_dir: Output directory (created if missing)
        name: Table name, used as the file stem
        quiet: Suppress progress output if True

    Returns:
        Path of the written file

    Raises:
        OutputPermissionError: If the file cannot be written
    """
    output_path = Path(output_dir) / f"{name}.csv"
    logger = logging.getLogger(__name__)

    if not quiet:
        print(f"  📝 Creating {output_path.name}...")

    try:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(output_path, index=name in INDEXED_TABLES, float_format="%.10g")
    except OSError as e:
        raise OutputPermissionError(f"Cannot write {output_path}: {e}") from e

    if not quiet:
        print(f"    ✓ Created {output_path.name} ({len(frame):,} rows)")

    logger.info(f"Created {output_path} with {len(frame)} rows")
    return output_path


def create_experiment_csvs(
    tables: Dict[str, pd.DataFrame], output_dir: str, quiet: bool = False
) -> Dict[str, Path]:
    """Write every table of an experiment, in name order."""
    return {
        name: write_table_csv(tables[name], output_dir, name, quiet)
        for name in sorted(tables)
    }
