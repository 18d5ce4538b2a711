"""Adam, the MAP training loop, experiment sweeps and run persistence."""

from .experiments import ensemble, prior_grid, regime_summary, run_regimes
from .optimizer import AdamState, adam_step, learning_rate
from .runs import persist_run
from .trainer import METRICS_COLUMNS, MetricsRecord, Trainer, TrainingResult, train

__all__ = [
    "AdamState",
    "adam_step",
    "learning_rate",
    "METRICS_COLUMNS",
    "MetricsRecord",
    "Trainer",
    "TrainingResult",
    "train",
    "persist_run",
    "run_regimes",
    "regime_summary",
    "prior_grid",
    "ensemble",
]
