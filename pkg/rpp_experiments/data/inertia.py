"""Moment-of-inertia regression data.

Inputs are five point masses laid out as [m₁, x₁, m₂, x₂, ...] (the rep
(R+V)^5); the target is the row-major flattened inertia matrix
𝓘 = Σ mᵢ (xᵢᵀxᵢ I − xᵢxᵢᵀ), a V⊗V quantity. The modified variant adds
0.3·𝓘²ẑẑᵀ𝓘, which singles out the z axis and breaks the O(3) symmetry.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

import numpy as np
import pandas as pd

from ..core.errors import ConfigError
from ..symmetry.groups import GroupSpec
from ..symmetry.reps import Base, Rep, Scalar, copies

N_MASSES = 5
MODIFICATION_STRENGTH = 0.3
FORMULA_VERSION = "inertia-1"

logger = logging.getLogger(__name__)


@dataclass
class InertiaDataset:
    """Inputs (n, 20) and flattened 3×3 targets (n, 9)."""

    inputs: np.ndarray
    targets: np.ndarray
    modified: bool = False
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.inputs)


def inertia_reps(group: GroupSpec) -> Tuple[Rep, Rep]:
    """(R+V)^5 -> V⊗V over the given group's base rep."""
    v = Base(group.base_dim)
    return copies(Scalar() + v, N_MASSES), v * v


def split_inputs(inputs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Masses (n, 5) and positions (n, 5, 3) from packed inputs."""
    packed = np.asarray(inputs, dtype=np.float64).reshape(-1, N_MASSES, 4)
    return packed[:, :, 0], packed[:, :, 1:]


def pack_inputs(masses: np.ndarray, positions: np.ndarray) -> np.ndarray:
    masses = np.asarray(masses, dtype=np.float64)
    positions = np.asarray(positions, dtype=np.float64)
    return np.concatenate([masses[..., None], positions], axis=-1).reshape(
        len(masses), -1
    )


def inertia_tensor(masses: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Σᵢ mᵢ (xᵢᵀxᵢ I − xᵢxᵢᵀ) for batches of shape (n, k) and (n, k, 3)."""
    sq = np.einsum("nki,nki->nk", positions, positions)
    outer = np.einsum("nki,nkj->nkij", positions, positions)
    per_mass = sq[..., None, None] * np.eye(3) - outer
    return np.einsum("nk,nkij->nij", masses, per_mass)


def modify_inertia(inertia: np.ndarray) -> np.ndarray:
    """𝓘 + 0.3·𝓘²ẑẑᵀ𝓘 for a batch of (n, 3, 3) matrices."""
    zz = np.zeros((3, 3))
    zz[2, 2] = 1.0
    return inertia + MODIFICATION_STRENGTH * inertia @ inertia @ zz @ inertia


def inertia_targets(inputs: np.ndarray, modified: bool = False) -> np.ndarray:
    masses, positions = split_inputs(inputs)
    inertia = inertia_tensor(masses, positions)
    if modified:
        inertia = modify_inertia(inertia)
    return inertia.reshape(len(inertia), 9)


def gen_inertia(
    n: int, rng: np.random.Generator, modified: bool = False
) -> InertiaDataset:
    """Sample n systems: xᵢ ~ N(0, I₃), mᵢ ~ |N(0, 1)| + 0.1.

    Raises:
        ConfigError: If n is below 1
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    positions = rng.standard_normal((n, N_MASSES, 3))
    masses = np.abs(rng.standard_normal((n, N_MASSES))) + 0.1
    inputs = pack_inputs(masses, positions)
    targets = inertia_targets(inputs, modified)
    metadata = {
        "formula_version": FORMULA_VERSION,
        "modified": modified,
        "modification_strength": MODIFICATION_STRENGTH if modified else 0.0,
        "n": n,
        "sampling": "x ~ N(0, I3), m ~ |N(0, 1)| + 0.1",
    }
    return InertiaDataset(inputs, targets, modified, metadata)


def rotation_about_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def symmetry_witness_inertia(
    rng: np.random.Generator, modified: bool = True, samples: int = 20
) -> float:
    """Largest relative violation of 𝓘(m, Rx) = R𝓘(m, x)Rᵀ over rotations about x.

    Near machine precision for the unmodified map, well above 1e-3 for the
    modified one.
    """
    data = gen_inertia(samples, rng, modified)
    masses, positions = split_inputs(data.inputs)
    worst = 0.0
    for k in range(samples):
        R = rotation_about_x(rng.uniform(0.3, np.pi - 0.3))
        rotated = pack_inputs(masses[k : k + 1], positions[k : k + 1] @ R.T)
        lhs = inertia_targets(rotated, modified).reshape(3, 3)
        rhs = R @ data.targets[k].reshape(3, 3) @ R.T
        worst = max(worst, float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs)))
    return worst


def inertia_frame(dataset: InertiaDataset) -> pd.DataFrame:
    """One row per sample: m{i}, x{i}_{xyz} inputs then I_{rc} targets."""
    columns = []
    for i in range(N_MASSES):
        columns += [f"m{i}", f"x{i}_x", f"x{i}_y", f"x{i}_z"]
    frame = pd.DataFrame(dataset.inputs, columns=columns)
    for k in range(9):
        frame[f"I_{k // 3}{k % 3}"] = dataset.targets[:, k]
    return frame
