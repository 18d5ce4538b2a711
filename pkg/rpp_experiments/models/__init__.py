"""MLP, EMLP and RPP models, priors and equivariance metrics."""

from .equivariance import equivariance_error, mean_equivariance_error, rel_err
from .model import Model, ModelSpec, build_model, build_rpp_conv, forward_rpp
from .prior import prior_penalty, sample_prior_weight

__all__ = [
    "Model",
    "ModelSpec",
    "build_model",
    "build_rpp_conv",
    "forward_rpp",
    "prior_penalty",
    "sample_prior_weight",
    "equivariance_error",
    "mean_equivariance_error",
    "rel_err",
]
