"""Configuration management for RPP Experiments.

Provides the ExperimentConfig dataclass and configuration utilities for managing
run settings, CLI arguments, JSON config files and runtime parameters.
"""

import argparse
import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

from .errors import ConfigError

MODEL_KINDS = ("mlp", "emlp", "rpp", "rpp-conv")
TASKS = ("inertia", "modified-inertia", "pendulum", "windy-pendulum", "csv-regression")
LR_SCHEDULES = ("constant", "cosine")


@dataclass
class ExperimentConfig:
    """Configuration settings for a single training run.

    Fields left as ``None`` are filled in from the task defaults when the run
    is resolved (see ``BaseTask.resolve_config``).

    Attributes:
        task: Task name (inertia, modified-inertia, pendulum, windy-pendulum,
            csv-regression)
        model: Model kind (mlp, emlp, rpp, rpp-conv)
        group: Symmetry group name; None uses the task's exact symmetry
        sigma_a2: Prior variance of the equivariant pathway
        sigma_b2: Prior variance of the unconstrained pathway
        epochs: Number of training epochs
        lr: Adam learning rate
        batch_size: Minibatch size (None or >= n_train means full batch)
        seed: Seed for data generation, initialization and shuffling
        output_dir: Root directory for run outputs
        depth: Number of hidden layers
        width: Hidden width
        n_train: Number of training examples (or trajectory chunks)
        n_test: Number of test examples (or trajectory chunks)
        workers: Worker threads for experiment fan-outs
        lr_schedule: constant or cosine
        prior_weight: Multiplier on the per-example prior penalty
        divergence_threshold: Loss above which a run is aborted
        eval_group_samples: Group elements sampled for equivariance error
        channels: Channels per convolutional layer for rpp-conv
        csv_path: Source CSV for csv-regression
        target_column: Target column for csv-regression
        image_reshape: Pad tabular features to a square image
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        cache_enabled: Use the persistent basis cache
        cache_file: Basis cache file path
    """

    task: str = "inertia"
    model: str = "rpp"
    group: Optional[str] = None
    sigma_a2: float = 1e5
    sigma_b2: float = 1.0
    epochs: Optional[int] = None
    lr: float = 3e-3
    batch_size: Optional[int] = None
    seed: int = 0
    output_dir: str = "results"
    depth: int = 3
    width: int = 128
    n_train: Optional[int] = None
    n_test: Optional[int] = None
    workers: int = 1
    lr_schedule: str = "constant"
    prior_weight: float = 1.0
    divergence_threshold: float = 1e8
    eval_group_samples: int = 10
    channels: int = 8
    csv_path: Optional[str] = None
    target_column: Optional[str] = None
    image_reshape: bool = True
    log_level: str = "INFO"
    cache_enabled: bool = True
    cache_file: str = "cache/basis_cache.json"

    def validate(self) -> "ExperimentConfig":
        """Check value ranges, raising ConfigError on the first problem.

        Returns:
            self, so calls can be chained
        """
        if self.task not in TASKS:
            raise ConfigError(f"Unknown task '{self.task}' (choose from {TASKS})")
        if self.model not in MODEL_KINDS:
            raise ConfigError(
                f"Unknown model kind '{self.model}' (choose from {MODEL_KINDS})"
            )
        if self.sigma_a2 <= 0 or self.sigma_b2 <= 0:
            raise ConfigError(
                f"Prior variances must be positive (sigma_a2={self.sigma_a2}, "
                f"sigma_b2={self.sigma_b2})"
            )
        if self.lr <= 0:
            raise ConfigError(f"Learning rate must be positive, got {self.lr}")
        if self.lr_schedule not in LR_SCHEDULES:
            raise ConfigError(f"Unknown lr schedule '{self.lr_schedule}'")
        if self.epochs is not None and self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.depth < 1 or self.width < 1:
            raise ConfigError("depth and width must be >= 1")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.task == "csv-regression" and not self.csv_path:
            raise ConfigError("csv-regression requires csv_path")
        return self

    def replace(self, **changes: Any) -> "ExperimentConfig":
        """Return a copy with the given fields changed."""
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """Build a config from a dictionary, rejecting unknown keys."""
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config is not valid JSON: {e}") from e
        return cls.from_dict(data)

    def config_hash(self) -> str:
        """Stable 12-character hash of the canonical JSON form.

        ``output_dir``, ``workers`` and ``log_level`` do not affect results
        and are excluded.
        """
        data = self.to_dict()
        for key in ("output_dir", "workers", "log_level"):
            data.pop(key, None)
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def load_config(path: str) -> ExperimentConfig:
    """Load an ExperimentConfig from a JSON file.

    Raises:
        ConfigError: If the file is missing or malformed
    """
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"Config file not found: {config_path}")
    return ExperimentConfig.from_json(config_path.read_text(encoding="utf-8"))


# argparse destination -> ExperimentConfig field
_ARG_FIELDS = {
    "task": "task",
    "model": "model",
    "group": "group",
    "sigma_a2": "sigma_a2",
    "sigma_b2": "sigma_b2",
    "epochs": "epochs",
    "lr": "lr",
    "batch_size": "batch_size",
    "seed": "seed",
    "out": "output_dir",
    "depth": "depth",
    "width": "width",
    "n_train": "n_train",
    "n_test": "n_test",
    "workers": "workers",
    "lr_schedule": "lr_schedule",
    "prior_weight": "prior_weight",
    "channels": "channels",
    "csv": "csv_path",
    "target": "target_column",
    "log_level": "log_level",
    "cache_file": "cache_file",
}


def create_config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Create an ExperimentConfig from parsed command line arguments.

    A ``--config`` file supplies the base values; flags given explicitly on the
    command line override them.

    Args:
        args: Parsed argument namespace from argparse

    Returns:
        ExperimentConfig with values from the config file and the flags
    """
    config_file = getattr(args, "config", None)
    config = load_config(config_file) if config_file else ExperimentConfig()

    changes: Dict[str, Any] = {}
    for dest, field_name in _ARG_FIELDS.items():
        value = getattr(args, dest, None)
        if value is not None:
            changes[field_name] = value
    if getattr(args, "no_cache", False):
        changes["cache_enabled"] = False
    if getattr(args, "no_image", False):
        changes["image_reshape"] = False

    return config.replace(**changes)


def setup_logging(
    log_level: str = "INFO", log_file: Optional[str] = "rpp_experiments.log"
) -> logging.Logger:
    """Setup logging configuration with specified level and formatting.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: File receiving a copy of the log; None logs to the console only

    Returns:
        Configured logger instance
    """
    handlers: list = [logging.StreamHandler()]
    if log_file:
        handlers.insert(0, logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
    )
    return logging.getLogger(__name__)
