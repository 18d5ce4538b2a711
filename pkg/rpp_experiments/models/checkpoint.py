"""Checkpoint files: a ``.npz`` parameter dump plus a JSON header."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from ..core.errors import StructuralError
from .model import Model

logger = logging.getLogger(__name__)


def checkpoint_header(model: Model, seed: Optional[int] = None) -> Dict[str, Any]:
    header: Dict[str, Any] = {
        "spec": model.spec.to_dict(),
        "seed": seed,
        "sigma_a2": model.spec.sigma_a2,
        "sigma_b2": model.spec.sigma_b2,
        "basis_ranks": model.basis_ranks,
        "parameter_count": model.num_parameters(),
        "parameters": {name: list(v.shape) for name, v in model.params.items()},
    }
    if model.hidden is not None:
        header["hidden_allocation"] = model.hidden.to_dict()
    return header


def save_checkpoint(model: Model, directory: str, seed: Optional[int] = None) -> Path:
    """Write ``checkpoint.npz`` and ``checkpoint.json`` into ``directory``.

    Returns:
        Path of the ``.npz`` file
    """
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    npz_path = path / "checkpoint.npz"
    np.savez(npz_path, **model.params)
    with open(path / "checkpoint.json", "w", encoding="utf-8") as f:
        json.dump(checkpoint_header(model, seed), f, indent=2, sort_keys=True)
    logger.info(f"Saved checkpoint to {npz_path}")
    return npz_path


def load_checkpoint(model: Model, directory: str) -> Dict[str, Any]:
    """Load parameters from ``directory`` into ``model`` and return the header.

    Raises:
        StructuralError: If the parameter names or shapes do not match the model
    """
    path = Path(directory)
    with open(path / "checkpoint.json", "r", encoding="utf-8") as f:
        header = json.load(f)
    with np.load(path / "checkpoint.npz") as data:
        values = {name: data[name] for name in data.files}
    missing = sorted(set(model.params) - set(values))
    extra = sorted(set(values) - set(model.params))
    if missing or extra:
        raise StructuralError(
            f"Checkpoint does not match model (missing {missing}, unexpected {extra})"
        )
    model.set_params(values)
    return header
