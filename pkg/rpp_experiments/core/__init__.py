"""Core modules for RPP Experiments.

Contains configuration management, the error hierarchy, basis caching and
progress tracking.
"""

from .cache import BasisCache
from .config import ExperimentConfig
from .progress import ProgressTracker

__all__ = ["ExperimentConfig", "BasisCache", "ProgressTracker"]
