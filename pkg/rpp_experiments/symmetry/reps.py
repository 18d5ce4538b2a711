"""Representation expressions and their matrices.

A representation is a small expression tree over four atoms:

    R   Scalar, the 1-dim trivial rep
    P   Pseudoscalar, g -> det(g) (or det of a diagonal block of g)
    V   Base, the defining n-dim rep (or a diagonal block of it)

combined with direct sums (``+``) and tensor products (``*``). The text form
is the one used on the command line and in config files, e.g.
``R+P^5+R+P^4`` or ``(R+V)^5``, where ``X^k`` is the k-fold direct sum.
"""

import functools
import re
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np
from scipy.linalg import block_diag

from ..core.errors import EmptyLieAlgebraError, StructuralError
from .groups import GroupSpec

Block = Optional[Tuple[int, int]]


class Rep:
    """Base class of representation expressions.

    Subclasses are frozen dataclasses so structural equality and hashing come
    for free; ``dim`` is computed once at construction.
    """

    dim: int

    def __add__(self, other: "Rep") -> "Rep":
        if not isinstance(other, Rep):
            return NotImplemented
        return direct_sum(self, other)

    def __mul__(self, other):
        if isinstance(other, int):
            return copies(self, other)
        if isinstance(other, Rep):
            return tensor_product(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, int):
            return copies(self, other)
        return NotImplemented

    def __pow__(self, k: int) -> "Rep":
        if k < 0:
            raise StructuralError(f"Tensor power must be >= 0, got {k}")
        if k == 0:
            return Scalar()
        return tensor_product(*([self] * k))

    def __str__(self) -> str:
        return rep_text(self)


def _check_block(block: Block) -> None:
    if block is not None:
        start, stop = block
        if start < 0 or stop <= start:
            raise StructuralError(f"Invalid block [{start}:{stop}]")


@dataclass(frozen=True, eq=True)
class Scalar(Rep):
    dim: int = field(default=1, init=False, compare=False)


@dataclass(frozen=True, eq=True)
class Pseudoscalar(Rep):
    """Transforms by det(g), or by det of the block ``g[i:j, i:j]``."""

    block: Block = None
    dim: int = field(default=1, init=False, compare=False)

    def __post_init__(self) -> None:
        _check_block(self.block)


@dataclass(frozen=True, eq=True)
class Base(Rep):
    """The defining representation on R^n, or its restriction to a diagonal block."""

    n: int
    block: Block = None
    dim: int = field(default=0, init=False, compare=False)

    def __post_init__(self) -> None:
        _check_block(self.block)
        if self.n < 1:
            raise StructuralError(f"Base rep needs n >= 1, got {self.n}")
        if self.block is not None and self.block[1] > self.n:
            raise StructuralError(
                f"Block [{self.block[0]}:{self.block[1]}] exceeds base "
                f"dimension {self.n}"
            )
        size = self.n if self.block is None else self.block[1] - self.block[0]
        object.__setattr__(self, "dim", size)


@dataclass(frozen=True, eq=True)
class Sum(Rep):
    reps: Tuple[Rep, ...]
    dim: int = field(default=0, init=False, compare=False)

    def __post_init__(self) -> None:
        flat: List[Rep] = []
        for rep in self.reps:
            flat.extend(rep.reps if isinstance(rep, Sum) else [rep])
        if not flat:
            raise StructuralError("Empty direct sum")
        object.__setattr__(self, "reps", tuple(flat))
        object.__setattr__(self, "dim", sum(r.dim for r in flat))


@dataclass(frozen=True, eq=True)
class Tensor(Rep):
    reps: Tuple[Rep, ...]
    dim: int = field(default=0, init=False, compare=False)

    def __post_init__(self) -> None:
        flat: List[Rep] = []
        for rep in self.reps:
            flat.extend(rep.reps if isinstance(rep, Tensor) else [rep])
        if not flat:
            raise StructuralError("Empty tensor product")
        object.__setattr__(self, "reps", tuple(flat))
        object.__setattr__(self, "dim", int(np.prod([r.dim for r in flat])))


def direct_sum(*reps: Rep) -> Rep:
    return reps[0] if len(reps) == 1 else Sum(tuple(reps))


def tensor_product(*reps: Rep) -> Rep:
    return reps[0] if len(reps) == 1 else Tensor(tuple(reps))


def copies(rep: Rep, k: int) -> Rep:
    """The k-fold direct sum rep ⊕ ... ⊕ rep."""
    if k < 1:
        raise StructuralError(f"Need at least one copy, got {k}")
    return direct_sum(*([rep] * k))


def summands(rep: Rep) -> List[Rep]:
    """Top-level direct summands of ``rep`` (a single-element list if not a sum)."""
    return list(rep.reps) if isinstance(rep, Sum) else [rep]


def _block_of(matrix: np.ndarray, block: Block) -> np.ndarray:
    if block is None:
        return matrix
    return matrix[block[0] : block[1], block[0] : block[1]]


def rho_of(rep: Rep, element: np.ndarray) -> np.ndarray:
    """Evaluate ρ(g) for a group element given in the defining representation.

    Raises:
        StructuralError: If the element does not match the rep's base dimension
    """
    g = np.asarray(element, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise StructuralError(f"Group element must be square, got shape {g.shape}")

    if isinstance(rep, Scalar):
        return np.ones((1, 1))
    if isinstance(rep, Base):
        if g.shape[0] != rep.n:
            raise StructuralError(
                f"Element of size {g.shape[0]} does not match base dimension {rep.n}"
            )
        return _block_of(g, rep.block).copy()
    if isinstance(rep, Pseudoscalar):
        return np.array([[np.linalg.det(_block_of(g, rep.block))]])
    if isinstance(rep, Sum):
        return block_diag(*[rho_of(r, g) for r in rep.reps])
    if isinstance(rep, Tensor):
        return functools.reduce(np.kron, [rho_of(r, g) for r in rep.reps])
    raise StructuralError(f"Unknown rep node {type(rep).__name__}")


def drho_of(
    rep: Rep, lie_gen: np.ndarray, group: Optional[GroupSpec] = None
) -> np.ndarray:
    """Push a Lie-algebra generator through the representation.

    Tensor products follow the Leibniz rule dρ₁⊗I + I⊗dρ₂, applied left to
    right over the flattened factors.

    Raises:
        EmptyLieAlgebraError: If ``group`` is given and has no Lie generators
        StructuralError: On a dimension mismatch
    """
    if group is not None and group.is_finite:
        raise EmptyLieAlgebraError(
            f"{group.name} is finite; it has no Lie algebra to differentiate"
        )
    a = np.asarray(lie_gen, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise StructuralError(f"Lie generator must be square, got shape {a.shape}")

    if isinstance(rep, Scalar):
        return np.zeros((1, 1))
    if isinstance(rep, Base):
        if a.shape[0] != rep.n:
            raise StructuralError(
                f"Generator of size {a.shape[0]} does not match base dimension {rep.n}"
            )
        return _block_of(a, rep.block).copy()
    if isinstance(rep, Pseudoscalar):
        return np.array([[np.trace(_block_of(a, rep.block))]])
    if isinstance(rep, Sum):
        return block_diag(*[drho_of(r, a) for r in rep.reps])
    if isinstance(rep, Tensor):
        acc = drho_of(rep.reps[0], a)
        for child in rep.reps[1:]:
            d_child = drho_of(child, a)
            acc = np.kron(acc, np.eye(child.dim)) + np.kron(
                np.eye(acc.shape[0]), d_child
            )
        return acc
    raise StructuralError(f"Unknown rep node {type(rep).__name__}")


# ---------------------------------------------------------------------------
# Text form


def _atom_text(rep: Rep) -> str:
    if isinstance(rep, Scalar):
        return "R"
    if isinstance(rep, Pseudoscalar):
        return "P" if rep.block is None else f"P[{rep.block[0]}:{rep.block[1]}]"
    if isinstance(rep, Base):
        return "V" if rep.block is None else f"V[{rep.block[0]}:{rep.block[1]}]"
    raise StructuralError(f"Not an atom: {rep!r}")


def _factor_text(rep: Rep) -> str:
    if isinstance(rep, Sum):
        return f"({rep_text(rep)})"
    return rep_text(rep)


def rep_text(rep: Rep) -> str:
    """Canonical text form; consecutive repeated summands print as ``X^k``."""
    if isinstance(rep, Tensor):
        return "*".join(_factor_text(r) for r in rep.reps)
    if not isinstance(rep, Sum):
        return _atom_text(rep)

    parts = []
    children = list(rep.reps)
    i = 0
    while i < len(children):
        j = i
        while j + 1 < len(children) and children[j + 1] == children[i]:
            j += 1
        count = j - i + 1
        child = children[i]
        if count == 1:
            parts.append(rep_text(child))
        elif isinstance(child, Tensor):
            parts.append(f"({rep_text(child)})^{count}")
        else:
            parts.append(f"{_atom_text(child)}^{count}")
        i = j + 1
    return "+".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+)|([RPV])(?:\[(\d+):(\d+)\])?|([+*^()]))")


def _tokenize(text: str) -> List[tuple]:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise StructuralError(f"Cannot parse rep text at position {pos}: {text!r}")
        number, atom, start, stop, op = match.groups()
        if number is not None:
            tokens.append(("int", int(number)))
        elif atom is not None:
            block = (int(start), int(stop)) if start is not None else None
            tokens.append(("atom", (atom, block)))
        else:
            tokens.append(("op", op))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, tokens: List[tuple], base_dim: int) -> None:
        self.tokens = tokens
        self.pos = 0
        self.base_dim = base_dim

    def peek(self) -> Optional[tuple]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple:
        token = self.peek()
        if token is None:
            raise StructuralError("Unexpected end of rep text")
        self.pos += 1
        return token

    def parse_sum(self) -> Rep:
        terms = [self.parse_term()]
        while self.peek() == ("op", "+"):
            self.take()
            terms.append(self.parse_term())
        return direct_sum(*terms)

    def parse_term(self) -> Rep:
        factors = [self.parse_factor()]
        while self.peek() == ("op", "*"):
            self.take()
            factors.append(self.parse_factor())
        return tensor_product(*factors)

    def parse_factor(self) -> Rep:
        rep = self.parse_atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, value = self.take()
            if kind != "int":
                raise StructuralError("Expected an integer after '^'")
            rep = copies(rep, value)
        return rep

    def parse_atom(self) -> Rep:
        kind, value = self.take()
        if kind == "op" and value == "(":
            rep = self.parse_sum()
            if self.take() != ("op", ")"):
                raise StructuralError("Unbalanced parentheses in rep text")
            return rep
        if kind != "atom":
            raise StructuralError(f"Unexpected token {value!r} in rep text")
        symbol, block = value
        if symbol == "R":
            if block is not None:
                raise StructuralError("Scalar R takes no block")
            return Scalar()
        if symbol == "P":
            return Pseudoscalar(block)
        return Base(self.base_dim, block)


def parse_rep(text: str, base_dim: int) -> Rep:
    """Parse the text form of a rep over a group with defining dimension ``base_dim``.

    Raises:
        StructuralError: On malformed text
    """
    parser = _Parser(_tokenize(text), base_dim)
    rep = parser.parse_sum()
    if parser.peek() is not None:
        raise StructuralError(f"Trailing tokens in rep text {text!r}")
    return rep


def iter_atoms(rep: Rep) -> Iterator[Rep]:
    """Yield the atoms of the expression tree in order."""
    if isinstance(rep, (Sum, Tensor)):
        for child in rep.reps:
            yield from iter_atoms(child)
    else:
        yield rep
