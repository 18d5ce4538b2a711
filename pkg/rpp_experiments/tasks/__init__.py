"""Learning tasks: data, reps, losses and metrics per experiment family."""

from .base import BaseTask, TaskData, TaskRegistry, task_registry
from .discovery import discover_tasks, get_task

__all__ = [
    "BaseTask",
    "TaskData",
    "TaskRegistry",
    "task_registry",
    "discover_tasks",
    "get_task",
]
