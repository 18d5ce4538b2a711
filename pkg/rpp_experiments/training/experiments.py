"""Experiment sweeps: symmetry regimes, the prior-variance grid and deep ensembles.

Every sweep expands into independent jobs (one training run each), fans them
out over a thread pool and merges the results by job key, so the output
tables do not depend on completion order or worker count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..core.cache import BasisCache
from ..core.config import ExperimentConfig
from ..core.errors import ConfigError, RPPError
from ..core.progress import ProgressTracker
from ..tasks.base import TaskData
from ..tasks.discovery import get_task
from .runs import persist_run
from .trainer import Trainer, TrainingResult

logger = logging.getLogger(__name__)

REGIMES: Dict[str, List[Tuple[str, str, str]]] = {
    "inertia": [
        ("exact", "inertia", "O(3)"),
        ("approximate", "modified-inertia", "O(3)"),
        ("misspecified", "inertia", "SL(3)"),
    ],
    "pendulum": [
        ("exact", "pendulum", "O(2)z"),
        ("approximate", "windy-pendulum", "O(2)z"),
        ("misspecified", "pendulum", "SO(3)"),
    ],
}
REGIME_MODELS = ("mlp", "emlp", "rpp")
DEFAULT_GRID = (1e-2, 1e0, 1e2, 1e4, 1e6)
ENSEMBLE_TASKS = ("inertia", "modified-inertia")

JobKey = Tuple


@dataclass
class Job:
    """One training run of a sweep, with optional pre-generated data."""

    key: JobKey
    config: ExperimentConfig
    data: Optional[TaskData] = None


@dataclass
class JobOutcome:
    key: JobKey
    config: ExperimentConfig
    result: Optional[TrainingResult] = None
    error: Optional[str] = None

    @property
    def status(self) -> str:
        if self.result is None:
            return "failed"
        return self.result.status

    def row(self) -> Dict[str, object]:
        row: Dict[str, object] = {
            "task": self.config.task,
            "model": self.config.model,
            "group": self.config.group,
            "seed": self.config.seed,
            "status": self.status,
        }
        if self.result is not None:
            row["test_mse"] = self.result.final_test_mse
            row["equivariance_error"] = self.result.final_equivariance_error
            row["epochs_completed"] = (
                self.result.metrics[-1].epoch if self.result.metrics else 0
            )
            row["error"] = self.result.error or ""
        else:
            row["test_mse"] = float("nan")
            row["equivariance_error"] = float("nan")
            row["epochs_completed"] = 0
            row["error"] = self.error or ""
        return row


def derive_seeds(base_seed: int, count: int) -> List[int]:
    """Independent 32-bit seeds for ``count`` jobs from one base seed."""
    children = np.random.SeedSequence(base_seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def _run_job(job: Job, cache: Optional[BasisCache], persist: bool) -> JobOutcome:
    try:
        trainer = Trainer(job.config, cache=cache)
        result = trainer.run(data=job.data)
        if persist:
            persist_run(result)
        return JobOutcome(job.key, trainer.config, result)
    except RPPError as e:
        logger.error(f"Job {job.key} failed: {e}", exc_info=True)
        return JobOutcome(job.key, job.config, error=str(e))


def run_jobs(
    jobs: Sequence[Job],
    workers: int = 1,
    cache: Optional[BasisCache] = None,
    progress: Optional[ProgressTracker] = None,
    persist: bool = False,
    description: str = "Running jobs",
) -> List[JobOutcome]:
    """Run jobs on a thread pool and return outcomes sorted by job key.

    Raises:
        ConfigError: If two jobs share a key
    """
    keys = [job.key for job in jobs]
    if len(set(keys)) != len(keys):
        raise ConfigError("Sweep jobs must have unique keys")
    progress = progress or ProgressTracker(quiet=True)
    outcomes: Dict[JobKey, JobOutcome] = {}

    with progress.operation(description, len(jobs)) as bar:
        if workers <= 1:
            for job in jobs:
                outcomes[job.key] = _run_job(job, cache, persist)
                bar.advance(status=outcomes[job.key].status)
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                futures = {
                    executor.submit(_run_job, job, cache, persist): job.key
                    for job in jobs
                }
                for future in as_completed(futures):
                    key = futures[future]
                    outcomes[key] = future.result()
                    bar.advance(status=outcomes[key].status)

    failed = sum(1 for o in outcomes.values() if o.status != "completed")
    logger.info(f"{description}: {len(jobs) - failed}/{len(jobs)} runs completed")
    return [outcomes[key] for key in sorted(outcomes)]


def regime_jobs(base: ExperimentConfig, family: str, seeds: Sequence[int]) -> List[Job]:
    if family not in REGIMES:
        raise ConfigError(
            f"Unknown regime family '{family}' (choose from {', '.join(REGIMES)})"
        )
    jobs = []
    for regime, task, group in REGIMES[family]:
        for seed in seeds:
            for model in REGIME_MODELS:
                config = base.replace(task=task, group=group, model=model, seed=seed)
                jobs.append(Job((regime, seed, model), config))
    return jobs


def run_regimes(
    base: ExperimentConfig,
    family: str,
    seeds: Sequence[int],
    cache: Optional[BasisCache] = None,
    progress: Optional[ProgressTracker] = None,
    persist: bool = False,
) -> pd.DataFrame:
    """Train MLP, EMLP and RPP on the exact, approximate and misspecified variants.

    Returns:
        One row per (regime, seed, model) with final test MSE
    """
    jobs = regime_jobs(base, family, seeds)
    outcomes = run_jobs(
        jobs, base.workers, cache, progress, persist, f"Regimes ({family})"
    )
    rows = []
    for outcome in outcomes:
        regime, _, _ = outcome.key
        rows.append({"family": family, "regime": regime, **outcome.row()})
    return pd.DataFrame(rows)


def regime_summary(frame: pd.DataFrame) -> pd.DataFrame:
    """Quartiles of test MSE per (regime, model) over completed runs."""
    completed = frame[frame["status"] == "completed"]
    grouped = completed.groupby(["family", "regime", "model"])["test_mse"]
    summary = grouped.agg(
        runs="count",
        min="min",
        q1=lambda s: s.quantile(0.25),
        median="median",
        q3=lambda s: s.quantile(0.75),
        max="max",
    ).reset_index()
    order = {"exact": 0, "approximate": 1, "misspecified": 2}
    summary["_order"] = summary["regime"].map(order)
    summary = summary.sort_values(["family", "_order", "model"]).drop(columns="_order")
    return summary.reset_index(drop=True)


def prior_grid(
    base: ExperimentConfig,
    sigma_a2_values: Sequence[float] = DEFAULT_GRID,
    sigma_b2_values: Sequence[float] = DEFAULT_GRID,
    cache: Optional[BasisCache] = None,
    progress: Optional[ProgressTracker] = None,
    persist: bool = False,
) -> pd.DataFrame:
    """Train one RPP per (σ_a², σ_b²) cell with the base seed.

    Returns:
        Long-form table with one row per cell
    """
    jobs = []
    for a2 in sigma_a2_values:
        for b2 in sigma_b2_values:
            config = base.replace(model="rpp", sigma_a2=float(a2), sigma_b2=float(b2))
            jobs.append(Job((float(a2), float(b2)), config))
    outcomes = run_jobs(jobs, base.workers, cache, progress, persist, "Prior grid")
    rows = []
    for outcome in outcomes:
        a2, b2 = outcome.key
        rows.append({"sigma_a2": a2, "sigma_b2": b2, **outcome.row()})
    return pd.DataFrame(rows)


def prior_grid_surface(frame: pd.DataFrame) -> pd.DataFrame:
    """Test MSE surface: rows σ_a², columns σ_b²."""
    surface = frame.pivot(index="sigma_a2", columns="sigma_b2", values="test_mse")
    return surface.sort_index().sort_index(axis=1)


def ensemble(
    base: ExperimentConfig,
    k: int = 10,
    tasks: Sequence[str] = ENSEMBLE_TASKS,
    cache: Optional[BasisCache] = None,
    progress: Optional[ProgressTracker] = None,
    persist: bool = False,
) -> pd.DataFrame:
    """Train ``k`` RPP members per task and return per-epoch traces.

    Members of one task share the dataset generated from the base seed and
    differ in initialization and minibatch order (member seeds derive from
    the base seed).

    Returns:
        Long-form traces: task, member, seed, epoch, equivariance_error, test_mse
    """
    if k < 1:
        raise ConfigError(f"Ensemble size must be >= 1, got {k}")
    member_seeds = derive_seeds(base.seed, k)
    jobs = []
    for task_name in tasks:
        task = get_task(task_name)
        task_config = task.resolve_config(base.replace(task=task_name, model="rpp"))
        data = Trainer(task_config, task).load_data()
        for member, seed in enumerate(member_seeds):
            jobs.append(Job((task_name, member), task_config.replace(seed=seed), data))
    outcomes = run_jobs(jobs, base.workers, cache, progress, persist, "Ensemble")

    rows = []
    for outcome in outcomes:
        task_name, member = outcome.key
        if outcome.result is None:
            continue
        for record in outcome.result.metrics:
            rows.append(
                {
                    "task": task_name,
                    "member": member,
                    "seed": outcome.config.seed,
                    "status": outcome.status,
                    "epoch": record.epoch,
                    "equivariance_error": record.equivariance_error,
                    "test_mse": record.test_mse,
                }
            )
    return pd.DataFrame(rows)


def final_equivariance(traces: pd.DataFrame) -> pd.DataFrame:
    """Median final-epoch equivariance error per task."""
    last = traces.loc[traces.groupby(["task", "member"])["epoch"].idxmax()]
    return (
        last.groupby("task")["equivariance_error"]
        .agg(members="count", median="median", min="min", max="max")
        .reset_index()
    )
