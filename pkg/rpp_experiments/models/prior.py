"""Gaussian priors over layer weights and the MAP penalty.

The RPP prior puts β ~ N(0, σ_a² I) on the equivariant coordinates and
B ~ N(0, σ_b² I) on the free weights, so W = reshape(Qβ) + B is distributed
as N(0, (σ_a² + σ_b²) QQᵀ + σ_b² (I − QQᵀ)).
"""

from typing import Dict, Optional, Union

import numpy as np

from ..autodiff import tensor as T
from ..autodiff.tensor import Tensor
from ..core.errors import ConfigError
from ..symmetry.basis import EquivariantBasis
from .model import Model


def _check(variances: Dict[str, float]) -> None:
    bad = {name: v for name, v in variances.items() if not v > 0}
    if bad:
        name, value = next(iter(bad.items()))
        raise ConfigError(f"Prior variance for '{name}' must be positive, got {value}")


def prior_penalty(
    model: Model, tensors: Optional[Dict[str, Tensor]] = None
) -> Union[float, Tensor]:
    """Negative log prior Σ ‖θ‖² / (2σ²) over all parameters.

    Returns a float, or a tensor on the tape when ``tensors`` (from
    ``model.bind``) are given.

    Raises:
        ConfigError: If any prior variance is nonpositive
    """
    variances = model.variances
    _check(variances)
    if tensors is None:
        return float(
            sum(
                np.sum(value**2) / (2.0 * variances[name])
                for name, value in model.params.items()
            )
        )
    total: Optional[Tensor] = None
    for name, value in tensors.items():
        term = T.scale(T.l2_norm_sq(value), 1.0 / (2.0 * variances[name]))
        total = term if total is None else T.add(total, term)
    return total if total is not None else Tensor(0.0)


def sample_prior_weight(
    basis: EquivariantBasis,
    sigma_a2: float,
    sigma_b2: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw W = reshape(Qβ) + B from the RPP prior of one layer.

    A zero variance switches its pathway off.
    """
    if sigma_a2 < 0 or sigma_b2 < 0:
        raise ConfigError(
            f"Prior variances must be nonnegative (sigma_a2={sigma_a2}, "
            f"sigma_b2={sigma_b2})"
        )
    beta = np.sqrt(sigma_a2) * rng.standard_normal(basis.rank)
    B = np.sqrt(sigma_b2) * rng.standard_normal((basis.n_out, basis.n_in))
    return basis.weight(beta) + B


def prior_covariance(
    basis: EquivariantBasis, sigma_a2: float, sigma_b2: float
) -> np.ndarray:
    """(σ_a² + σ_b²) QQᵀ + σ_b² (I − QQᵀ) over row-major vec(W)."""
    Q = basis.dense()
    projector = Q @ Q.T
    n = projector.shape[0]
    return (sigma_a2 + sigma_b2) * projector + sigma_b2 * (np.eye(n) - projector)


def min_prior_cost(
    basis: EquivariantBasis, W: np.ndarray, sigma_a2: float, sigma_b2: float
) -> float:
    """Smallest penalty ‖β‖²/2σ_a² + ‖B‖²/2σ_b² over all (β, B) producing W.

    The optimum splits the equivariant component in proportion to the
    variances, leaving ‖QQᵀw‖²/2(σ_a²+σ_b²) + ‖(I−QQᵀ)w‖²/2σ_b².
    """
    inside = basis.weight(basis.coordinates(W))
    outside = W - inside
    return float(
        np.sum(inside**2) / (2.0 * (sigma_a2 + sigma_b2))
        + np.sum(outside**2) / (2.0 * sigma_b2)
    )
