"""JSON output for experiment tables with generation metadata."""

import json
import logging
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from .. import __version__


def _clean(value: Any) -> Any:
    """JSON-safe scalar: NaN/Inf become None, numpy scalars become Python ones."""
    if hasattr(value, "item") and not isinstance(value, (list, dict)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _records(frame: pd.DataFrame, name: str) -> List[Dict[str, Any]]:
    if name == "prior_grid_surface":
        frame = frame.reset_index()
    frame = frame.rename(columns=str)
    return [
        {key: _clean(value) for key, value in row.items()}
        for row in frame.to_dict(orient="records")
    ]


def create_json_output(
    tables: Dict[str, pd.DataFrame],
    output_dir: str,
    name: str,
    metadata: Optional[Dict[str, Any]] = None,
    quiet: bool = False,
) -> bool:
    """Write all tables of an experiment into ``<output_dir>/<name>.json``.

    Args:
        tables: Tables by name
        output_dir: Output directory (created if missing)
        name: File stem, usually the experiment name
        metadata: Configuration snapshot and other run information
        quiet: Suppress progress output if True

    Returns:
        True if the JSON file was written, False otherwise
    """
    output_path = Path(output_dir) / f"{name}.json"
    logger = logging.getLogger(__name__)

    if not quiet:
        print("  📝 Creating JSON output...")

    document = {
        "generated_at": datetime.now().isoformat(timespec="seconds"),
        "generator": f"RPP Experiments v{__version__}",
        "metadata": metadata or {},
        "tables": {
            table: _records(tables[table].copy(), table) for table in sorted(tables)
        },
    }

    try:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, "w", encoding="utf-8") as f:
            json.dump(document, f, indent=2, default=str)
    except OSError as e:
        if not quiet:
            print(f"  ❌ Failed to create JSON output: {e}")
        logger.error(f"Failed to create JSON output: {e}")
        return False

    if not quiet:
        print(f"    ✓ Created {output_path.name} ({len(tables)} tables)")
    logger.info(f"Created JSON output: {output_path}")
    return True
