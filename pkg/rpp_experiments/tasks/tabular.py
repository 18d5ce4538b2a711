"""Regression on numeric CSVs treated as zero-padded images."""

from typing import Dict, Optional, Tuple

import numpy as np

from ..autodiff import tensor as T
from ..autodiff.tensor import Tape, Tensor
from ..core.config import ExperimentConfig
from ..core.errors import ConfigError
from ..data.tabular import ingest_csv_regression
from ..models.equivariance import model_weight_residual
from ..models.model import Model, ModelSpec
from ..symmetry.groups import GroupSpec
from ..symmetry.reps import Rep
from .base import BaseTask, TaskData

DEFAULT_TARGET = "y"


class CSVRegressionTask(BaseTask):
    """Standardized CSV features, fit with an MLP or the convolutional RPP.

    No matrix group acts on tabular features, so the equivariance error
    reported for this task is the weight-space residual of the conv layers.
    """

    name = "csv-regression"
    description = "Numeric CSV regression with features reshaped to an image"
    family = "tabular"
    model_kinds = ("mlp", "rpp-conv")

    default_epochs = 200
    default_batch_size = 128
    default_n_train = None
    default_n_test = None

    def reps(self, group: GroupSpec) -> Tuple[Rep, Rep]:
        raise ConfigError("csv-regression has no symmetry group")

    def resolve_config(self, config: ExperimentConfig) -> ExperimentConfig:
        config = super().resolve_config(config)
        if config.target_column is None:
            config = config.replace(target_column=DEFAULT_TARGET)
        if config.model == "rpp-conv" and not config.image_reshape:
            raise ConfigError("rpp-conv needs image reshaping (drop --no-image)")
        return config

    def load_data(self, config: ExperimentConfig, rng: np.random.Generator) -> TaskData:
        dataset = ingest_csv_regression(
            config.csv_path, config.target_column, config.image_reshape, config.seed
        )
        metadata = dict(dataset.metadata)
        metadata["feature_names"] = dataset.feature_names
        return TaskData(
            dataset.X_train,
            dataset.X_test,
            dataset.y_train,
            dataset.y_test,
            metadata,
            dataset.image_shape,
        )

    def model_spec(self, config: ExperimentConfig, data: TaskData) -> ModelSpec:
        return ModelSpec(
            kind=config.model,
            depth=config.depth,
            width=config.width,
            sigma_a2=config.sigma_a2,
            sigma_b2=config.sigma_b2,
            n_in=data.train_inputs.shape[1],
            n_out=1,
            image_shape=data.image_shape if config.model == "rpp-conv" else None,
            channels=config.channels,
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

    def equivariance_error(
        self,
        model: Model,
        data: TaskData,
        config: ExperimentConfig,
        rng: np.random.Generator,
    ) -> float:
        return model_weight_residual(model)
