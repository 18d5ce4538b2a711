"""Run directories: config snapshot, metrics, timing, checkpoint and environment.

Each run lands in ``<output_dir>/runs/<timestamp>-<config hash>/`` with

    config.json       exact resolved ExperimentConfig
    metrics.csv       epoch,train_loss,test_mse,prior_penalty,objective,equivariance_error
    timing.csv        epoch,wall_clock_seconds
    summary.json      status, final metrics, symmetry witness
    checkpoint.npz / checkpoint.json
    environment.json  seed, package and library versions, platform
"""

import csv
import json
import logging
import os
import platform
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import scipy

from .. import __version__
from ..core.config import ExperimentConfig
from ..core.errors import OutputPermissionError
from ..models.checkpoint import save_checkpoint
from .trainer import METRICS_COLUMNS, MetricsRecord, TrainingResult

logger = logging.getLogger(__name__)


def ensure_writable(output_dir: str) -> Path:
    """Create ``output_dir`` if needed and check it can be written.

    Raises:
        OutputPermissionError: If the directory cannot be created or written
    """
    path = Path(output_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputPermissionError(
            f"Cannot create output directory {path}: {e}"
        ) from e
    if not path.is_dir() or not os.access(path, os.W_OK | os.X_OK):
        raise OutputPermissionError(f"Output directory {path} is not writable")
    return path


def run_directory_name(
    config: ExperimentConfig, timestamp: Optional[datetime] = None
) -> str:
    stamp = (timestamp or datetime.now()).strftime("%Y%m%d-%H%M%S-%f")
    return f"{stamp}-{config.config_hash()}"


def environment_info(seed: int) -> Dict[str, Any]:
    return {
        "seed": seed,
        "package_version": __version__,
        "python": platform.python_version(),
        "platform": platform.platform(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def write_metrics_csv(path: Path, metrics: List[MetricsRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(METRICS_COLUMNS)
        for record in metrics:
            writer.writerow([record.epoch] + [repr(float(v)) for v in record.row()[1:]])


def write_timing_csv(path: Path, metrics: List[MetricsRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "wall_clock_seconds"])
        for record in metrics:
            writer.writerow([record.epoch, f"{record.wall_clock:.6f}"])


def read_metrics_csv(path: str) -> List[Dict[str, float]]:
    with open(path, "r", newline="", encoding="utf-8") as f:
        return [
            {key: float(value) for key, value in row.items()}
            for row in csv.DictReader(f)
        ]


def persist_run(result: TrainingResult, output_dir: Optional[str] = None) -> Path:
    """Write every artifact of a finished (or diverged) run.

    Returns:
        The run directory
    """
    config = result.config
    root = ensure_writable(output_dir or config.output_dir) / "runs"
    run_dir = root / run_directory_name(config)
    run_dir.mkdir(parents=True, exist_ok=True)

    (run_dir / "config.json").write_text(config.to_json(), encoding="utf-8")
    write_metrics_csv(run_dir / "metrics.csv", result.metrics)
    write_timing_csv(run_dir / "timing.csv", result.metrics)
    (run_dir / "summary.json").write_text(
        json.dumps(result.summary(), indent=2, sort_keys=True, default=float),
        encoding="utf-8",
    )
    save_checkpoint(result.model, str(run_dir), seed=config.seed)
    (run_dir / "environment.json").write_text(
        json.dumps(environment_info(config.seed), indent=2, sort_keys=True),
        encoding="utf-8",
    )
    logger.info(f"Persisted run to {run_dir}")
    return run_dir
