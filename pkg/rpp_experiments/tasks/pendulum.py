"""Hamiltonian learning on the double spring pendulum (with and without wind)."""

from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from ..autodiff.tensor import Tape, Tensor
from ..core.config import ExperimentConfig
from ..data.pendulum import (
    TIME_STEP,
    gen_pendulum,
    hnn_rollout_loss,
    learned_trajectory,
    pendulum_frame,
    pendulum_reps,
    pendulum_system,
    rollout_relative_error,
    symmetry_witness_pendulum,
)
from ..models.model import Model
from ..symmetry.groups import GroupSpec
from ..symmetry.reps import Rep
from .base import BaseTask, TaskData


class PendulumTask(BaseTask):
    """Fit a scalar energy H_θ(z) whose RK4 rollouts match trajectory chunks.

    The model maps the state rep V^4 to a scalar, and ż is read off the
    tape gradient of H_θ, so the symmetry group acts on the energy.
    """

    name = "pendulum"
    description = "Double spring pendulum energy, rotation symmetry about z"
    family = "pendulum"
    windy = False

    default_group = "O(2)z"
    default_epochs = 1000
    default_batch_size = 500
    default_n_train = 500
    default_n_test = 500

    @property
    def system(self):
        return pendulum_system(self.windy)

    def reps(self, group: GroupSpec) -> Tuple[Rep, Rep]:
        return pendulum_reps(group)

    def load_data(self, config: ExperimentConfig, rng: np.random.Generator) -> TaskData:
        dataset = gen_pendulum(self.system, config.n_train, config.n_test, rng)
        return TaskData(dataset.train, dataset.test, metadata=dataset.metadata)

    def batch_loss(
        self,
        model: Model,
        tensors: Dict[str, Tensor],
        inputs: np.ndarray,
        targets: Optional[np.ndarray],
        tape: Tape,
    ) -> Tensor:
        return hnn_rollout_loss(lambda z: model(z, tensors), inputs, tape, TIME_STEP)

    def _rollout(self, model: Model, chunks: np.ndarray) -> np.ndarray:
        """Predicted chunks (n, L, 12) started from the true first states."""
        steps = chunks.shape[1] - 1
        trajectory = learned_trajectory(model, chunks[:, 0], TIME_STEP, steps)
        return np.transpose(trajectory, (1, 0, 2))

    def test_mse(self, model: Model, data: TaskData) -> float:
        predicted = self._rollout(model, data.test_inputs)
        return float(np.mean((predicted[:, 1:] - data.test_inputs[:, 1:]) ** 2))

    def evaluation_inputs(self, data: TaskData, limit: int = 100) -> np.ndarray:
        return data.test_inputs[:limit, 0]

    def final_metrics(self, model: Model, data: TaskData) -> Dict[str, float]:
        predicted = self._rollout(model, data.test_inputs)
        error = rollout_relative_error(predicted, data.test_inputs)
        return {"rollout_relative_error": error}

    def symmetry_witness(self, rng: np.random.Generator) -> Optional[float]:
        return symmetry_witness_pendulum(self.system, rng)

    def dataset_frames(self, data: TaskData) -> Dict[str, pd.DataFrame]:
        return {
            "train": pendulum_frame(data.train_inputs),
            "test": pendulum_frame(data.test_inputs),
        }


class WindyPendulumTask(PendulumTask):
    """Pendulum with a horizontal wind term that breaks the rotation symmetry."""

    name = "windy-pendulum"
    description = "Double spring pendulum with wind, approximate symmetry about z"
    windy = True
