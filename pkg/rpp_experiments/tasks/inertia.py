"""Moment-of-inertia regression tasks (exact and modified targets)."""

from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from ..autodiff import tensor as T
from ..autodiff.tensor import Tape, Tensor
from ..core.config import ExperimentConfig
from ..data.inertia import (
    InertiaDataset,
    gen_inertia,
    inertia_frame,
    inertia_reps,
    symmetry_witness_inertia,
)
from ..models.model import Model
from ..symmetry.groups import GroupSpec
from ..symmetry.reps import Rep
from .base import BaseTask, TaskData


class InertiaTask(BaseTask):
    """Predict the inertia matrix of five point masses (O(3)-equivariant)."""

    name = "inertia"
    description = "Inertia matrix of five point masses, exact O(3) symmetry"
    family = "inertia"
    modified = False

    default_group = "O(3)"
    default_epochs = 500
    default_batch_size = None
    default_n_train = 1000
    default_n_test = 1000

    def reps(self, group: GroupSpec) -> Tuple[Rep, Rep]:
        return inertia_reps(group)

    def load_data(self, config: ExperimentConfig, rng: np.random.Generator) -> TaskData:
        train = gen_inertia(config.n_train, rng, self.modified)
        test = gen_inertia(config.n_test, rng, self.modified)
        metadata = dict(train.metadata)
        metadata.pop("n", None)
        metadata.update({"n_train": config.n_train, "n_test": config.n_test})
        return TaskData(
            train.inputs, test.inputs, train.targets, test.targets, metadata
        )

    def batch_loss(
        self,
        model: Model,
        tensors: Dict[str, Tensor],
        inputs: np.ndarray,
        targets: Optional[np.ndarray],
        tape: Tape,
    ) -> Tensor:
        prediction = model(inputs, tensors)
        return T.mean(T.square(T.sub(prediction, targets)))

    def test_mse(self, model: Model, data: TaskData) -> float:
        residual = model.predict(data.test_inputs) - data.test_targets
        return float(np.mean(residual**2))

    def symmetry_witness(self, rng: np.random.Generator) -> Optional[float]:
        return symmetry_witness_inertia(rng, modified=self.modified)

    def dataset_frames(self, data: TaskData) -> Dict[str, pd.DataFrame]:
        frames = {}
        for split, X, y in (
            ("train", data.train_inputs, data.train_targets),
            ("test", data.test_inputs, data.test_targets),
        ):
            frames[split] = inertia_frame(InertiaDataset(X, y, self.modified))
        return frames


class ModifiedInertiaTask(InertiaTask):
    """Inertia targets with an extra z-axis term that breaks O(3)."""

    name = "modified-inertia"
    description = "Inertia matrix plus a z-axis term, approximate O(3) symmetry"
    modified = True
