"""Finite-difference verification of tape gradients."""

import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .tensor import Tape, Tensor

logger = logging.getLogger(__name__)

ScalarFn = Callable[[Tape, Dict[str, Tensor]], Tensor]


def _evaluate(f: ScalarFn, params: Dict[str, np.ndarray]) -> float:
    tape = Tape()
    tensors = {name: tape.parameter(name, value) for name, value in params.items()}
    return f(tape, tensors).item()


def finite_diff_check(
    f: ScalarFn,
    params: Dict[str, np.ndarray],
    max_coords: int = 200,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Maximum relative error between tape gradients and central differences.

    ``f`` receives a fresh tape and the parameters registered on it and must
    return a scalar tensor. Each checked coordinate uses the step
    h = 1e-5·max(1, |θ|); at most ``max_coords`` coordinates are sampled.

    The per-coordinate error is |a − n| / max(|a| + |n|, 1e-6·max(1, max|n|)),
    so coordinates whose gradient is near zero are judged on an absolute scale.
    """
    params = {name: np.array(value, dtype=np.float64) for name, value in params.items()}
    tape = Tape()
    tensors = {name: tape.parameter(name, value) for name, value in params.items()}
    analytic = tape.backward(f(tape, tensors))

    coords: List[Tuple[str, int]] = [
        (name, i) for name, value in params.items() for i in range(value.size)
    ]
    if len(coords) > max_coords:
        rng = rng if rng is not None else np.random.default_rng(0)
        picks = rng.choice(len(coords), size=max_coords, replace=False)
        coords = [coords[i] for i in sorted(picks)]

    numeric = []
    for name, i in coords:
        flat = params[name].reshape(-1)
        original = flat[i]
        h = 1e-5 * max(1.0, abs(original))
        flat[i] = original + h
        plus = _evaluate(f, params)
        flat[i] = original - h
        minus = _evaluate(f, params)
        flat[i] = original
        numeric.append((plus - minus) / (2 * h))

    numeric_arr = np.array(numeric)
    analytic_arr = np.array([analytic[name].reshape(-1)[i] for name, i in coords])
    floor = 1e-6 * max(1.0, float(np.max(np.abs(numeric_arr), initial=0.0)))
    denom = np.maximum(np.abs(analytic_arr) + np.abs(numeric_arr), floor)
    errors = np.abs(analytic_arr - numeric_arr) / denom
    worst = float(errors.max(initial=0.0))
    logger.debug(
        f"Gradient check over {len(coords)} coordinates: max rel err {worst:.3e}"
    )
    return worst
