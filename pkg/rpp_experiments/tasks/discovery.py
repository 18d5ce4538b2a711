"""Task discovery and loading."""

import importlib
import inspect
import logging
import pkgutil
from pathlib import Path
from typing import List

from .base import BaseTask, task_registry

logger = logging.getLogger(__name__)


def discover_tasks() -> List[str]:
    """Import every task module in this package and register its tasks.

    Returns:
        Names of the modules that contributed at least one task
    """
    discovered = []
    package_path = Path(__file__).parent

    for _, name, _ in pkgutil.iter_modules([str(package_path)]):
        if name.startswith("_") or name in ("base", "discovery"):
            continue
        try:
            module = importlib.import_module(f"{__package__}.{name}")
        except ImportError as e:
            logger.warning(f"Failed to load task module {name}: {e}")
            continue
        if load_task_module(module):
            discovered.append(name)
            logger.debug(f"Discovered task module: {name}")

    logger.debug(f"Discovered {len(discovered)} task modules")
    return discovered


def load_task_module(module) -> int:
    """Register every concrete BaseTask subclass defined in ``module``.

    Returns:
        Number of tasks registered
    """
    found = 0
    for _, attr in inspect.getmembers(module, inspect.isclass):
        if (
            issubclass(attr, BaseTask)
            and attr is not BaseTask
            and attr.__module__ == module.__name__
            and not inspect.isabstract(attr)
        ):
            if task_registry.register(attr):
                found += 1
    return found


def get_task(name: str) -> BaseTask:
    """Create a task by name, discovering task modules on first use."""
    if not task_registry.list_tasks():
        discover_tasks()
    return task_registry.create(name)
