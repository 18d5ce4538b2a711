"""Equivariance error of models and weights.

RelErr(a, b) = ‖a − b‖ / (‖a‖ + ‖b‖), which lies in [0, 1]. The
equivariance error of f at (x, g) is RelErr(ρ_out(g) f(x), f(ρ_in(g) x)).
"""

import logging
from typing import Callable

import numpy as np

from ..core.errors import StructuralError
from ..symmetry.basis import EquivariantBasis, project_equivariant
from ..symmetry.groups import GroupSpec, sample_group_element
from ..symmetry.reps import Rep, rho_of
from .layers import RPPLinear
from .model import Model

logger = logging.getLogger(__name__)


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    """RelErr of two vectors; an all-zero pair is defined as 0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.linalg.norm(a) + np.linalg.norm(b)
    if denom == 0:
        logger.warning("RelErr of two zero vectors, reporting 0")
        return 0.0
    return float(np.linalg.norm(a - b) / denom)


def equivariance_error(
    f: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    g: np.ndarray,
    rep_in: Rep,
    rep_out: Rep,
) -> float:
    """Equivariance error of ``f`` at one input, or the mean over a batch of rows."""
    x = np.asarray(x, dtype=np.float64)
    batch = x if x.ndim == 2 else x[None, :]
    if batch.shape[1] != rep_in.dim:
        raise StructuralError(
            f"Input of width {batch.shape[1]} does not match rep_in dim {rep_in.dim}"
        )
    r_in = rho_of(rep_in, g)
    r_out = rho_of(rep_out, g)
    fx = np.asarray(f(batch)).reshape(len(batch), -1)
    f_gx = np.asarray(f(batch @ r_in.T)).reshape(len(batch), -1)
    transformed = fx @ r_out.T
    errors = [rel_err(a, b) for a, b in zip(transformed, f_gx)]
    return float(np.mean(errors))


def mean_equivariance_error(
    model: Model,
    X: np.ndarray,
    group: GroupSpec,
    rep_in: Rep,
    rep_out: Rep,
    rng: np.random.Generator,
    n_elements: int = 10,
) -> float:
    """Mean equivariance error over ``n_elements`` sampled g and all rows of X."""
    errors = [
        equivariance_error(
            model.predict, X, sample_group_element(group, rng), rep_in, rep_out
        )
        for _ in range(n_elements)
    ]
    return float(np.mean(errors))


def weight_space_equivariance_residual(W: np.ndarray, basis: EquivariantBasis) -> float:
    """‖W − QQᵀW‖ / ‖W‖ (0 for a zero matrix)."""
    W = np.asarray(W, dtype=np.float64)
    norm = np.linalg.norm(W)
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(W - project_equivariant(basis, W)) / norm)


def model_weight_residual(model: Model) -> float:
    """Mean weight-space residual over layers that have an equivariant path.

    Used where no matrix group acts on the data (convolutional models on
    tabular images). Layers with a full basis contribute 0.
    """
    tensors = model.constants()
    residuals = []
    for layer in model.layers:
        if isinstance(layer, RPPLinear) and layer.equivariant and layer.basis.rank:
            W = layer.weight(tensors).data
            residuals.append(weight_space_equivariance_residual(W, layer.basis))
    return float(np.mean(residuals)) if residuals else 0.0
