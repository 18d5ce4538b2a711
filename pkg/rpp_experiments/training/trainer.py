"""MAP training loop.

The optimized scalar is

    objective = data_loss + prior_weight · prior_penalty(θ) / n_train

where ``prior_penalty`` is the negative log prior Σ‖θ‖²/2σ² of the model.
Every epoch logs the full-training-set data loss, the scaled prior term,
their sum, the test MSE and the mean equivariance error.
"""

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..autodiff import tensor as T
from ..autodiff.tensor import Tape, Tensor
from ..core.cache import BasisCache
from ..core.config import ExperimentConfig
from ..core.errors import (
    NonFiniteGradientError,
    NumericalError,
    TrainingDivergedError,
)
from ..core.progress import ProgressTracker
from ..models.model import Model
from ..models.prior import prior_penalty
from ..tasks.base import BaseTask, TaskData
from ..tasks.discovery import get_task
from .optimizer import AdamState, adam_step, learning_rate

METRICS_COLUMNS = (
    "epoch",
    "train_loss",
    "test_mse",
    "prior_penalty",
    "objective",
    "equivariance_error",
)

logger = logging.getLogger(__name__)


@dataclass
class MetricsRecord:
    """Metrics of one epoch; epoch 0 is the initialization."""

    epoch: int
    train_loss: float
    test_mse: float
    prior_penalty: float
    objective: float
    equivariance_error: float
    wall_clock: float = 0.0

    def row(self) -> List[Any]:
        return [getattr(self, column) for column in METRICS_COLUMNS]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TrainingResult:
    """Outcome of one run.

    Attributes:
        config: The resolved configuration that was trained
        model: Model holding the final (or last finite) parameters
        metrics: One record per logged epoch
        status: "completed" or "diverged"
        error: Failure message for diverged runs
        final: Task-specific end-of-run metrics
        symmetry_witness: Recorded symmetry violation of the data, if any
    """

    config: ExperimentConfig
    model: Model
    metrics: List[MetricsRecord] = field(default_factory=list)
    status: str = "completed"
    error: Optional[str] = None
    final: Dict[str, float] = field(default_factory=dict)
    symmetry_witness: Optional[float] = None

    @property
    def succeeded(self) -> bool:
        return self.status == "completed"

    @property
    def final_test_mse(self) -> float:
        return self.metrics[-1].test_mse if self.metrics else float("nan")

    @property
    def final_equivariance_error(self) -> float:
        return self.metrics[-1].equivariance_error if self.metrics else float("nan")

    def summary(self) -> Dict[str, Any]:
        summary: Dict[str, Any] = {
            "task": self.config.task,
            "model": self.config.model,
            "group": self.config.group,
            "seed": self.config.seed,
            "status": self.status,
            "epochs_completed": self.metrics[-1].epoch if self.metrics else 0,
            "test_mse": self.final_test_mse,
            "equivariance_error": self.final_equivariance_error,
            "parameters": self.model.num_parameters(),
        }
        if self.error:
            summary["error"] = self.error
        if self.symmetry_witness is not None:
            summary["symmetry_witness"] = self.symmetry_witness
        summary.update(self.final)
        return summary


def map_objective(
    task: BaseTask,
    model: Model,
    tensors: Dict[str, Tensor],
    inputs: np.ndarray,
    targets: Optional[np.ndarray],
    tape: Tape,
    prior_scale: float,
):
    """(objective, data loss, scaled prior term) as tape tensors."""
    loss = task.batch_loss(model, tensors, inputs, targets, tape)
    prior = T.scale(prior_penalty(model, tensors), prior_scale)
    return T.add(loss, prior), loss, prior


class Trainer:
    """Trains one model on one task for a resolved configuration."""

    def __init__(
        self,
        config: ExperimentConfig,
        task: Optional[BaseTask] = None,
        cache: Optional[BasisCache] = None,
        progress: Optional[ProgressTracker] = None,
    ) -> None:
        self.task = task or get_task(config.task)
        self.config = self.task.resolve_config(config)
        self.cache = cache
        self.progress = progress or ProgressTracker(quiet=True)
        self.logger = logging.getLogger(__name__)
        seeds = np.random.SeedSequence(self.config.seed).spawn(4)
        self._data_seed, self._init_seed, self._shuffle_seed, self._eval_seed = seeds

    def load_data(self) -> TaskData:
        return self.task.load_data(self.config, np.random.default_rng(self._data_seed))

    def build_model(self, data: TaskData) -> Model:
        return self.task.build(
            self.config, data, np.random.default_rng(self._init_seed), self.cache
        )

    def evaluate(self, model: Model, data: TaskData, epoch: int) -> MetricsRecord:
        """Full-training-set objective terms, test MSE and equivariance error."""
        prior_scale = self.config.prior_weight / data.n_train
        tape = Tape()
        objective, loss, prior = map_objective(
            self.task,
            model,
            model.constants(),
            data.train_inputs,
            data.train_targets,
            tape,
            prior_scale,
        )
        equivariance = self.task.equivariance_error(
            model, data, self.config, np.random.default_rng(self._eval_seed)
        )
        return MetricsRecord(
            epoch=epoch,
            train_loss=loss.item(),
            test_mse=self.task.test_mse(model, data),
            prior_penalty=prior.item(),
            objective=objective.item(),
            equivariance_error=equivariance,
        )

    def _check(self, record: MetricsRecord) -> None:
        values = [record.train_loss, record.objective, record.test_mse]
        if not np.all(np.isfinite(values)):
            raise TrainingDivergedError(
                f"Non-finite loss at epoch {record.epoch}", record.epoch
            )
        if record.objective > self.config.divergence_threshold:
            raise TrainingDivergedError(
                f"Objective {record.objective:.3g} exceeded "
                f"{self.config.divergence_threshold:.0e} at epoch {record.epoch}",
                record.epoch,
            )

    def train_epoch(
        self,
        model: Model,
        data: TaskData,
        state: AdamState,
        rng: np.random.Generator,
        lr: float,
        epoch: int,
    ) -> None:
        n = data.n_train
        batch_size = min(self.config.batch_size or n, n)
        order = rng.permutation(n) if batch_size < n else np.arange(n)
        prior_scale = self.config.prior_weight / n
        for start in range(0, n, batch_size):
            index = order[start : start + batch_size]
            inputs, targets = data.batch(index)
            tape = Tape()
            tensors = model.bind(tape)
            objective, _, _ = map_objective(
                self.task, model, tensors, inputs, targets, tape, prior_scale
            )
            grads = tape.backward(objective)
            model.params = adam_step(model.params, grads, state, lr, epoch=epoch)

    def run(
        self,
        data: Optional[TaskData] = None,
        model: Optional[Model] = None,
        callback=None,
    ) -> TrainingResult:
        """Train for ``config.epochs`` epochs.

        Divergence (objective above the threshold, non-finite loss or
        gradient, or a rollout that leaves the finite range) ends the run
        early with status "diverged"; the metrics up to that point are kept.

        Args:
            data: Pre-generated data (generated from the seed when omitted)
            model: Pre-built model (built from the seed when omitted)
            callback: Called with each MetricsRecord after it is logged
        """
        config = self.config
        data = data if data is not None else self.load_data()
        model = model if model is not None else self.build_model(data)
        result = TrainingResult(config, model)
        state = AdamState()
        shuffle_rng = np.random.default_rng(self._shuffle_seed)
        label = f"{config.task}/{config.model} seed={config.seed}"
        epoch = 0
        self.logger.info(
            f"Training {label}: {config.epochs} epochs, n_train={data.n_train}, "
            f"batch={config.batch_size or data.n_train}, lr={config.lr}"
        )

        try:
            with self.progress.operation(f"Training {label}", config.epochs) as bar:
                start = time.perf_counter()
                record = self.evaluate(model, data, 0)
                record.wall_clock = time.perf_counter() - start
                self._log(result, record, callback)
                for epoch in range(1, config.epochs + 1):
                    start = time.perf_counter()
                    lr = learning_rate(
                        config.lr, config.lr_schedule, epoch - 1, config.epochs
                    )
                    self.train_epoch(model, data, state, shuffle_rng, lr, epoch)
                    record = self.evaluate(model, data, epoch)
                    record.wall_clock = time.perf_counter() - start
                    self._log(result, record, callback)
                    bar.advance(loss=record.train_loss, test=record.test_mse)
        except TrainingDivergedError as e:
            result.status = "diverged"
            result.error = str(e)
            if isinstance(e, NonFiniteGradientError):
                self.logger.error(f"{label} diverged: {e} (epoch {e.epoch})")
            else:
                self.logger.error(f"{label} diverged: {e}")
        except NumericalError as e:
            result.status = "diverged"
            result.error = f"{e} at epoch {epoch}"
            self.logger.error(f"{label} diverged: {result.error}")

        if result.succeeded:
            result.final = self.task.final_metrics(model, data)
        result.symmetry_witness = self.task.symmetry_witness(
            np.random.default_rng(self._eval_seed)
        )
        self.logger.info(
            f"Finished {label}: status={result.status}, "
            f"test_mse={result.final_test_mse:.4g}"
        )
        return result

    def _log(self, result: TrainingResult, record: MetricsRecord, callback) -> None:
        self._check(record)
        result.metrics.append(record)
        self.logger.debug(
            f"epoch {record.epoch}: loss={record.train_loss:.4g} "
            f"test={record.test_mse:.4g} equiv={record.equivariance_error:.3g}"
        )
        if callback is not None:
            callback(record)


def train(
    config: ExperimentConfig,
    cache: Optional[BasisCache] = None,
    progress: Optional[ProgressTracker] = None,
) -> TrainingResult:
    """Resolve the task of ``config`` and train one model."""
    return Trainer(config, cache=cache, progress=progress).run()
