"""Matrix groups given by discrete and Lie-algebra generators.

Group elements are always matrices in the defining representation. Continuous
groups are sampled through the matrix exponential of random Lie-algebra
combinations, finite groups through random generator words.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from ..core.errors import ConfigError, StructuralError

DET_TOLERANCE = 1e-10
MAX_WORD_LENGTH = 5

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GroupSpec:
    """A matrix group described by its generators.

    Attributes:
        name: Display name used in configs and reports (e.g. "O(3)")
        base_dim: Dimension n of the defining representation
        discrete_generators: n×n invertible matrices
        lie_generators: n×n Lie-algebra basis matrices (may be empty)
    """

    name: str
    base_dim: int
    discrete_generators: List[np.ndarray] = field(default_factory=list)
    lie_generators: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        n = self.base_dim
        if n < 1:
            raise StructuralError(f"{self.name}: base_dim must be positive, got {n}")
        discrete = [np.asarray(h, dtype=np.float64) for h in self.discrete_generators]
        lie = [np.asarray(a, dtype=np.float64) for a in self.lie_generators]
        for mat in discrete + lie:
            if mat.shape != (n, n):
                raise StructuralError(
                    f"{self.name}: generator of shape {mat.shape} does not match "
                    f"base_dim {n}"
                )
        for h in discrete:
            if abs(np.linalg.det(h)) <= DET_TOLERANCE:
                raise StructuralError(f"{self.name}: discrete generator is singular")
        if lie:
            stacked = np.stack([a.ravel() for a in lie])
            if np.linalg.matrix_rank(stacked) < len(lie):
                raise StructuralError(
                    f"{self.name}: Lie generators are linearly dependent"
                )
        object.__setattr__(self, "discrete_generators", discrete)
        object.__setattr__(self, "lie_generators", lie)

    @property
    def is_finite(self) -> bool:
        return not self.lie_generators

    @property
    def is_orthogonal(self) -> bool:
        """True when every generator preserves the Euclidean inner product."""
        eye = np.eye(self.base_dim)
        discrete_ok = all(np.allclose(h.T @ h, eye) for h in self.discrete_generators)
        lie_ok = all(np.allclose(a, -a.T) for a in self.lie_generators)
        return discrete_ok and lie_ok

    def __repr__(self) -> str:
        return (
            f"GroupSpec({self.name}, n={self.base_dim}, "
            f"discrete={len(self.discrete_generators)}, lie={len(self.lie_generators)})"
        )


def expm(matrix: np.ndarray, terms: int = 18) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a truncated Taylor series.

    The matrix is scaled by 2^-s until its 1-norm is at most 0.5, the series is
    summed to ``terms`` terms and the result squared s times.
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise StructuralError(f"expm needs a square matrix, got shape {a.shape}")
    norm = np.linalg.norm(a, 1)
    squarings = max(0, int(np.ceil(np.log2(norm / 0.5)))) if norm > 0.5 else 0
    scaled = a / (2.0**squarings)

    result = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for k in range(1, terms + 1):
        term = term @ scaled / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def group_element(
    group: GroupSpec,
    word: Sequence[int] = (),
    coefficients: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Build the element (product of discrete generators) × exp(Σ cᵢ Aᵢ).

    Args:
        group: Group to draw the element from
        word: Indices into ``group.discrete_generators``, multiplied left to right
        coefficients: One coefficient per Lie generator (None means zero)
    """
    element = np.eye(group.base_dim)
    for index in word:
        element = element @ group.discrete_generators[index]
    if coefficients is not None:
        if len(coefficients) != len(group.lie_generators):
            raise StructuralError(
                f"{group.name}: expected {len(group.lie_generators)} Lie coefficients, "
                f"got {len(coefficients)}"
            )
        if group.lie_generators:
            algebra = sum(c * a for c, a in zip(coefficients, group.lie_generators))
            element = element @ expm(algebra)
    return element


def sample_group_element(
    group: GroupSpec,
    rng: np.random.Generator,
    word_length: Optional[int] = None,
) -> np.ndarray:
    """Sample a random group element.

    A random word of discrete generators (length drawn from 0..5 unless given)
    times exp of a Lie-algebra combination with N(0, 1) coefficients.
    """
    if word_length is None:
        word_length = int(rng.integers(0, MAX_WORD_LENGTH + 1))
    word: List[int] = []
    if group.discrete_generators:
        word = [
            int(i)
            for i in rng.integers(0, len(group.discrete_generators), size=word_length)
        ]
    coefficients = None
    if group.lie_generators:
        coefficients = rng.standard_normal(len(group.lie_generators))
    return group_element(group, word, coefficients)


def enumerate_finite_group(group: GroupSpec, max_size: int = 512) -> List[np.ndarray]:
    """Close the discrete generators under multiplication.

    Raises:
        StructuralError: If the group has Lie generators or does not close
            within ``max_size`` elements
    """
    if not group.is_finite:
        raise StructuralError(f"{group.name} is not a finite group")

    def key(mat: np.ndarray) -> bytes:
        return np.round(mat, 8).tobytes()

    identity = np.eye(group.base_dim)
    elements = {key(identity): identity}
    frontier = [identity]
    while frontier:
        next_frontier = []
        for element in frontier:
            for gen in group.discrete_generators:
                product = element @ gen
                k = key(product)
                if k not in elements:
                    elements[k] = product
                    next_frontier.append(product)
                    if len(elements) > max_size:
                        raise StructuralError(
                            f"{group.name} did not close within {max_size} elements"
                        )
        frontier = next_frontier
    logger.debug(f"Enumerated {len(elements)} elements of {group.name}")
    return list(elements.values())


# ---------------------------------------------------------------------------
# Built-in groups

_J2 = np.array([[0.0, -1.0], [1.0, 0.0]])
_LX = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
_LY = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
_LZ = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


def SO2() -> GroupSpec:
    return GroupSpec("SO(2)", 2, [], [_J2])


def O2() -> GroupSpec:
    return GroupSpec("O(2)", 2, [np.diag([1.0, -1.0])], [_J2])


def SO3() -> GroupSpec:
    return GroupSpec("SO(3)", 3, [], [_LX, _LY, _LZ])


def O3() -> GroupSpec:
    return GroupSpec("O(3)", 3, [-np.eye(3)], [_LX, _LY, _LZ])


def SL3() -> GroupSpec:
    """Volume and orientation preserving maps: the traceless Lie algebra sl(3)."""
    generators = []
    for i in range(3):
        for j in range(3):
            if i != j:
                e = np.zeros((3, 3))
                e[i, j] = 1.0
                generators.append(e)
    generators.append(np.diag([1.0, -1.0, 0.0]))
    generators.append(np.diag([0.0, 1.0, -1.0]))
    return GroupSpec("SL(3)", 3, [], generators)


def SO2z() -> GroupSpec:
    """Rotations about the z axis acting on R³."""
    return GroupSpec("SO(2)z", 3, [], [_LZ])


def O2z() -> GroupSpec:
    """Rotations about the z axis plus the reflection y -> -y, acting on R³."""
    return GroupSpec("O(2)z", 3, [np.diag([1.0, -1.0, 1.0])], [_LZ])


def Z2() -> GroupSpec:
    """Left/right swap acting on R² by the permutation matrix."""
    return GroupSpec("Z2", 2, [np.array([[0.0, 1.0], [1.0, 0.0]])])


def Z4() -> GroupSpec:
    """Cyclic permutation of four legs."""
    return GroupSpec("Z4", 4, [np.roll(np.eye(4), 1, axis=0)])


def Z2xZ2() -> GroupSpec:
    """Two commuting flips on a block-diagonal 3×3 carrier.

    Block [0:1] is the sign of the left/right flip, block [1:3] the swap
    permutation of the up/down flip.
    """
    flip_lr = np.diag([-1.0, 1.0, 1.0])
    flip_ud = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    return GroupSpec("Z2xZ2", 3, [flip_lr, flip_ud])


def D4() -> GroupSpec:
    """Symmetries of the square: quarter turn and a reflection."""
    return GroupSpec("D4", 2, [_J2.copy(), np.diag([1.0, -1.0])])


def Trivial(n: int) -> GroupSpec:
    return GroupSpec(f"Trivial({n})", n, [], [])


GROUP_CONSTRUCTORS: Dict[str, Callable[[], GroupSpec]] = {
    "SO(2)": SO2,
    "O(2)": O2,
    "SO(3)": SO3,
    "O(3)": O3,
    "SL(3)": SL3,
    "SO(2)z": SO2z,
    "O(2)z": O2z,
    "Z2": Z2,
    "Z4": Z4,
    "Z2xZ2": Z2xZ2,
    "D4": D4,
}

_TRIVIAL_PATTERN = re.compile(r"^Trivial\((\d+)\)$")


def get_group(name: str) -> GroupSpec:
    """Look up a built-in group by name (``Trivial(n)`` for any n).

    Raises:
        ConfigError: If the name is unknown
    """
    if name in GROUP_CONSTRUCTORS:
        return GROUP_CONSTRUCTORS[name]()
    match = _TRIVIAL_PATTERN.match(name)
    if match:
        return Trivial(int(match.group(1)))
    known = ", ".join(sorted(GROUP_CONSTRUCTORS))
    raise ConfigError(f"Unknown group '{name}' (known: {known}, Trivial(n))")
