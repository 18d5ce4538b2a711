"""Dataset files for the gen-data command: one CSV per split plus JSON metadata."""

import json
import logging
from pathlib import Path
from typing import Any, Dict

import pandas as pd

from .. import __version__

logger = logging.getLogger(__name__)


def write_dataset_files(
    frames: Dict[str, pd.DataFrame],
    metadata: Dict[str, Any],
    output_dir: str,
    name: str,
    quiet: bool = False,
) -> Dict[str, Path]:
    """Write ``{name}_{split}.csv`` for each frame and ``{name}_metadata.json``.

    Args:
        frames: DataFrame per split name (train, test)
        metadata: Formula version, constants, seed and counts
        output_dir: Target directory (created if missing)
        name: File name prefix, usually the task name
        quiet: Suppress progress output if True

    Returns:
        Written paths keyed by split, plus "metadata"
    """
    directory = Path(output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written: Dict[str, Path] = {}

    for split, frame in frames.items():
        path = directory / f"{name}_{split}.csv"
        if not quiet:
            print(f"  📝 Creating {path.name}...")
        frame.to_csv(path, index=False, float_format="%.17g")
        written[split] = path
        if not quiet:
            print(f"    ✓ Created {path.name} ({len(frame):,} rows)")

    meta_path = directory / f"{name}_metadata.json"
    payload = {"package_version": __version__, **metadata}
    payload["counts"] = {split: len(frame) for split, frame in frames.items()}
    meta_path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str))
    written["metadata"] = meta_path
    logger.info(f"Wrote {name} dataset ({len(frames)} splits) to {directory}")
    return written
