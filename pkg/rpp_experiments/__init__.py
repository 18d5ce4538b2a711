"""RPP Experiments - soft equivariance priors for neural networks.

This package builds equivariant linear-layer bases for matrix groups, trains
MLP, EMLP and residual-pathway-prior (RPP) models with a small reverse-mode
autodiff engine, and runs the exact / approximate / misspecified symmetry
experiments on synthetic dynamics data.

Modules:
    core: Configuration, errors, basis caching and progress tracking
    symmetry: Groups, representations and equivariant basis solvers
    autodiff: Tape-based reverse-mode differentiation
    models: Layers, models, priors and the equivariance metric
    data: Inertia, pendulum and tabular datasets
    tasks: Task plugins and registry
    training: Optimizer, training loop, experiment sweeps and run persistence
    output: Summary writers (CSV, JSON, Excel)
    utils: Command line interface

Version: 1.0.0
License: MIT
"""

from .core.cache import BasisCache
from .core.config import ExperimentConfig
from .core.progress import ProgressTracker

__version__ = "1.0.0"
__license__ = "MIT"

__all__ = [
    "ExperimentConfig",
    "BasisCache",
    "ProgressTracker",
]
