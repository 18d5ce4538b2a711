"""Base task interface and registry for RPP Experiments."""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Type

import numpy as np
import pandas as pd

from ..autodiff.tensor import Tape, Tensor
from ..core.cache import BasisCache
from ..core.config import ExperimentConfig
from ..core.errors import ConfigError
from ..models.equivariance import mean_equivariance_error
from ..models.model import Model, ModelSpec, build_model
from ..symmetry.groups import GroupSpec, get_group
from ..symmetry.reps import Rep


@dataclass
class TaskData:
    """Train/test split of one task.

    ``*_inputs`` index examples along the first axis. Regression tasks carry
    targets; trajectory tasks keep whole chunks in the inputs and no targets.
    """

    train_inputs: np.ndarray
    test_inputs: np.ndarray
    train_targets: Optional[np.ndarray] = None
    test_targets: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)
    image_shape: Optional[Tuple[int, int]] = None

    @property
    def n_train(self) -> int:
        return len(self.train_inputs)

    @property
    def n_test(self) -> int:
        return len(self.test_inputs)

    def batch(self, index: np.ndarray) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        targets = self.train_targets[index] if self.train_targets is not None else None
        return self.train_inputs[index], targets


class BaseTask(ABC):
    """Abstract base class for learning tasks.

    A task owns its data, the reps its inputs and outputs transform under,
    its loss and its evaluation metrics. Subclasses set the metadata class
    attributes and the defaults used to fill ``None`` config fields.
    """

    # Task metadata - must be defined by subclasses
    name: str = ""
    description: str = ""
    family: str = ""
    model_kinds: Tuple[str, ...] = ("mlp", "emlp", "rpp")

    default_group: Optional[str] = None
    default_epochs: int = 100
    default_batch_size: Optional[int] = None
    default_n_train: Optional[int] = 1000
    default_n_test: Optional[int] = 1000

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(self.__class__.__name__)

    def resolve_config(self, config: ExperimentConfig) -> ExperimentConfig:
        """Fill task defaults into unset fields and check the model kind."""
        if config.task != self.name:
            config = config.replace(task=self.name)
        if config.model not in self.model_kinds:
            raise ConfigError(
                f"Task '{self.name}' does not support model '{config.model}' "
                f"(choose from {', '.join(self.model_kinds)})"
            )
        changes: Dict[str, Any] = {}
        if config.group is None and self.default_group is not None:
            changes["group"] = self.default_group
        if config.epochs is None:
            changes["epochs"] = self.default_epochs
        if config.batch_size is None and self.default_batch_size is not None:
            changes["batch_size"] = self.default_batch_size
        if config.n_train is None and self.default_n_train is not None:
            changes["n_train"] = self.default_n_train
        if config.n_test is None and self.default_n_test is not None:
            changes["n_test"] = self.default_n_test
        return config.replace(**changes).validate()

    def group(self, config: ExperimentConfig) -> Optional[GroupSpec]:
        return get_group(config.group) if config.group else None

    @abstractmethod
    def reps(self, group: GroupSpec) -> Tuple[Rep, Rep]:
        """Input and output reps of the task under ``group``."""
        raise NotImplementedError("Subclasses must implement reps")

    @abstractmethod
    def load_data(self, config: ExperimentConfig, rng: np.random.Generator) -> TaskData:
        """Generate (or read) the train/test split for a resolved config."""
        raise NotImplementedError("Subclasses must implement load_data")

    @abstractmethod
    def batch_loss(
        self,
        model: Model,
        tensors: Dict[str, Tensor],
        inputs: np.ndarray,
        targets: Optional[np.ndarray],
        tape: Tape,
    ) -> Tensor:
        """Data loss of one minibatch, recorded on ``tape``."""
        raise NotImplementedError("Subclasses must implement batch_loss")

    @abstractmethod
    def test_mse(self, model: Model, data: TaskData) -> float:
        raise NotImplementedError("Subclasses must implement test_mse")

    def model_spec(self, config: ExperimentConfig, data: TaskData) -> ModelSpec:
        group = self.group(config)
        if group is None:
            raise ConfigError(f"Task '{self.name}' needs a symmetry group")
        rep_in, rep_out = self.reps(group)
        return ModelSpec(
            kind=config.model,
            rep_in=rep_in,
            rep_out=rep_out,
            group=group,
            depth=config.depth,
            width=config.width,
            sigma_a2=config.sigma_a2,
            sigma_b2=config.sigma_b2,
        )

    def build(
        self,
        config: ExperimentConfig,
        data: TaskData,
        rng: np.random.Generator,
        cache: Optional[BasisCache] = None,
    ) -> Model:
        return build_model(self.model_spec(config, data), rng=rng, cache=cache)

    def equivariance_error(
        self,
        model: Model,
        data: TaskData,
        config: ExperimentConfig,
        rng: np.random.Generator,
    ) -> float:
        """Mean equivariance error on test inputs under the configured group."""
        group = self.group(config)
        rep_in, rep_out = self.reps(group)
        X = self.evaluation_inputs(data)
        return mean_equivariance_error(
            model, X, group, rep_in, rep_out, rng, config.eval_group_samples
        )

    def evaluation_inputs(self, data: TaskData, limit: int = 100) -> np.ndarray:
        return data.test_inputs[:limit]

    def symmetry_witness(self, rng: np.random.Generator) -> Optional[float]:
        """Recorded symmetry violation of the data-generating process, if any."""
        return None

    def final_metrics(self, model: Model, data: TaskData) -> Dict[str, float]:
        """Task-specific metrics reported once at the end of training."""
        return {}

    def dataset_frames(self, data: TaskData) -> Dict[str, pd.DataFrame]:
        """One DataFrame per split for the gen-data command."""
        raise NotImplementedError(f"Task '{self.name}' cannot export datasets")

    @classmethod
    def validate_task(cls) -> bool:
        """Validate that the task class has required attributes.

        Returns:
            True if task is valid, False otherwise
        """
        required_attrs = ["name", "description", "family"]
        for attr in required_attrs:
            if not getattr(cls, attr, None):
                return False
        return True


class TaskRegistry:
    """Registry for managing learning tasks."""

    def __init__(self):
        self.tasks: Dict[str, Type[BaseTask]] = {}
        self.logger = logging.getLogger(__name__)

    def register(self, task_class: Type[BaseTask]) -> bool:
        """Register a task class.

        Args:
            task_class: Task class to register

        Returns:
            True if task was registered successfully, False otherwise
        """
        if not task_class.validate_task():
            self.logger.error(
                f"Invalid task {task_class.__name__}: missing required attributes"
            )
            return False

        task_name = task_class.name.lower()
        existing = self.tasks.get(task_name)
        if existing is not None and existing is not task_class:
            self.logger.warning(f"Task {task_name} already registered, overwriting")

        self.tasks[task_name] = task_class
        self.logger.debug(f"Registered task: {task_name}")
        return True

    def get(self, name: str) -> Optional[Type[BaseTask]]:
        return self.tasks.get(name.lower())

    def list_tasks(self) -> Dict[str, Type[BaseTask]]:
        return self.tasks.copy()

    def create(self, name: str) -> BaseTask:
        """Create an instance of a task.

        Raises:
            ConfigError: If no task of that name is registered
        """
        task_class = self.get(name)
        if task_class is None:
            known = ", ".join(sorted(self.tasks)) or "none registered"
            raise ConfigError(f"Unknown task '{name}' (known: {known})")
        return task_class()


# Global task registry instance
task_registry = TaskRegistry()
