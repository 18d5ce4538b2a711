"""Equivariant linear-layer bases.

The equivariance constraint ρ_out(g) W = W ρ_in(g) is linear in W. It is
imposed for every discrete generator h and every Lie generator A, stacked into
one constraint matrix over the row-major vectorization vec(W):

    discrete:  (ρ_out(h) ⊗ ρ_in(h)^-T) - I
    Lie:       (dρ_out(A) ⊗ I) - (I ⊗ dρ_in(A)^T)

and the orthonormal null space is read off a dense SVD. Layers wider than a
few dozen units are solved blockwise over direct-sum summands so that the
dense solver only ever sees one pair of small summands at a time.
"""

import hashlib
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from ..core.cache import BasisCache
from ..core.errors import NumericalError, SizeLimitError, StructuralError
from .groups import GroupSpec, sample_group_element
from .reps import Rep, Scalar, drho_of, rep_text, rho_of, summands

TOLERANCE = 1e-7
MAX_DENSE_ENTRIES = 1_000_000
MAX_CONSTRAINT_ROWS = 100_000

logger = logging.getLogger(__name__)

Matrix = Union[np.ndarray, sp.spmatrix]

_memory_cache = BasisCache(None)


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    """Stacked equivariance constraints C with C·vec(W) = 0 iff W is equivariant."""

    rows: np.ndarray
    provenance: List[str]
    n_in: int
    n_out: int


@dataclass(frozen=True, eq=False)
class EquivariantBasis:
    """Orthonormal basis Q of the equivariant maps R^n_in -> R^n_out.

    Q has shape (n_out·n_in, r) and may be dense or scipy-sparse. Columns
    index row-major vectorized weight matrices.
    """

    Q: Matrix
    n_in: int
    n_out: int
    tolerance: float = TOLERANCE
    # Per-column scale for bases built from raw patterns (conv taps).
    column_norms: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def rank(self) -> int:
        return int(self.Q.shape[1])

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.Q)

    def dense(self) -> np.ndarray:
        return self.Q.toarray() if self.is_sparse else np.asarray(self.Q)

    def weight(self, beta: np.ndarray) -> np.ndarray:
        """reshape(Q β) as an (n_out, n_in) matrix."""
        return np.asarray(self.Q @ np.asarray(beta)).reshape(self.n_out, self.n_in)

    def coordinates(self, W: np.ndarray) -> np.ndarray:
        """Qᵀ vec(W)."""
        W = np.asarray(W, dtype=np.float64)
        if W.shape != (self.n_out, self.n_in):
            raise StructuralError(
                f"Weight of shape {W.shape} does not match basis "
                f"({self.n_out}, {self.n_in})"
            )
        return np.asarray(self.Q.T @ W.ravel()).ravel()


def build_constraints(group: GroupSpec, rep_in: Rep, rep_out: Rep) -> ConstraintSystem:
    """Stack the equivariance constraints for maps rep_in -> rep_out.

    Raises:
        SizeLimitError: If n_out·n_in or the number of rows exceeds the dense scope
    """
    n_in, n_out = rep_in.dim, rep_out.dim
    n = n_in * n_out
    if n > MAX_DENSE_ENTRIES:
        raise SizeLimitError(
            f"Dense constraint system for {n_out}x{n_in} maps exceeds "
            f"{MAX_DENSE_ENTRIES:,} unknowns"
        )
    n_rows = n * (len(group.discrete_generators) + len(group.lie_generators))
    if n_rows > MAX_CONSTRAINT_ROWS:
        raise SizeLimitError(
            f"Constraint system would have {n_rows:,} rows (limit "
            f"{MAX_CONSTRAINT_ROWS:,})"
        )

    blocks = []
    provenance = []
    eye = np.eye(n)
    for i, h in enumerate(group.discrete_generators):
        r_in = rho_of(rep_in, h)
        r_out = rho_of(rep_out, h)
        blocks.append(np.kron(r_out, np.linalg.inv(r_in).T) - eye)
        provenance.append(f"discrete[{i}]")
    for i, a in enumerate(group.lie_generators):
        d_in = drho_of(rep_in, a)
        d_out = drho_of(rep_out, a)
        blocks.append(np.kron(d_out, np.eye(n_in)) - np.kron(np.eye(n_out), d_in.T))
        provenance.append(f"lie[{i}]")

    rows = np.vstack(blocks) if blocks else np.zeros((0, n))
    return ConstraintSystem(rows, provenance, n_in, n_out)


def solve_basis(C: ConstraintSystem, tolerance: float = TOLERANCE) -> EquivariantBasis:
    """Orthonormal null space of C by SVD.

    Right singular vectors with σ < tolerance·max(σ_max, 1) are kept; an empty
    system returns the identity.

    Raises:
        SizeLimitError: If C has more than 10⁵ rows
        NumericalError: If C is not finite or the SVD does not converge
    """
    n = C.n_in * C.n_out
    rows = C.rows
    if rows.shape[0] == 0:
        return EquivariantBasis(np.eye(n), C.n_in, C.n_out, tolerance)
    if rows.shape[0] > MAX_CONSTRAINT_ROWS:
        raise SizeLimitError(f"{rows.shape[0]:,} constraint rows exceed dense scope")
    if not np.all(np.isfinite(rows)):
        raise NumericalError(f"Constraint matrix {rows.shape} contains NaN or Inf")

    try:
        _, s, vt = scipy.linalg.svd(rows, full_matrices=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(
            f"SVD failed on constraint matrix of shape {rows.shape} "
            f"(max |entry| {np.abs(rows).max():.3g}): {e}"
        ) from e

    singular = np.zeros(n)
    singular[: len(s)] = s
    cutoff = tolerance * max(singular.max(), 1.0)
    Q = vt[singular < cutoff].T
    return EquivariantBasis(Q, C.n_in, C.n_out, tolerance)


def _group_fingerprint(group: GroupSpec) -> str:
    digest = hashlib.sha1()
    for mat in group.discrete_generators + group.lie_generators:
        digest.update(np.round(mat, 12).tobytes())
    return f"{group.name}#{digest.hexdigest()[:8]}"


def _block_basis(
    group: GroupSpec, rep_in: Rep, rep_out: Rep, cache: BasisCache, tolerance: float
) -> np.ndarray:
    key = BasisCache.make_key(
        _group_fingerprint(group), rep_text(rep_in), rep_text(rep_out), tolerance
    )
    q = cache.get(key)
    if q is None:
        q = solve_basis(build_constraints(group, rep_in, rep_out), tolerance).dense()
        logger.debug(
            f"Solved {group.name} block {rep_text(rep_in)} -> {rep_text(rep_out)}: "
            f"rank {q.shape[1]}"
        )
        cache.put(key, q)
    return q


def equivariant_basis(
    group: GroupSpec,
    rep_in: Rep,
    rep_out: Rep,
    cache: Optional[BasisCache] = None,
    tolerance: float = TOLERANCE,
) -> EquivariantBasis:
    """Blockwise equivariant basis for maps rep_in -> rep_out.

    Each pair of direct summands is solved on its own (identical pairs only
    once) and placed into a sparse Q. The projector QQᵀ equals the one from
    a dense solve of the full system.
    """
    cache = cache if cache is not None else _memory_cache
    n_in, n_out = rep_in.dim, rep_out.dim
    ins = summands(rep_in)
    outs = summands(rep_out)
    in_offsets = np.cumsum([0] + [r.dim for r in ins])
    out_offsets = np.cumsum([0] + [r.dim for r in outs])

    row_index: List[np.ndarray] = []
    col_index: List[np.ndarray] = []
    values: List[np.ndarray] = []
    n_cols = 0
    for i, r_out in enumerate(outs):
        for j, r_in in enumerate(ins):
            q = _block_basis(group, r_in, r_out, cache, tolerance)
            if q.shape[1] == 0:
                continue
            local_out = out_offsets[i] + np.arange(r_out.dim)
            local_in = in_offsets[j] + np.arange(r_in.dim)
            flat = (local_out[:, None] * n_in + local_in[None, :]).ravel()
            rows, cols = np.nonzero(np.abs(q) > 0)
            row_index.append(flat[rows])
            col_index.append(cols + n_cols)
            values.append(q[rows, cols])
            n_cols += q.shape[1]

    if n_cols:
        Q = sp.csr_matrix(
            (
                np.concatenate(values),
                (np.concatenate(row_index), np.concatenate(col_index)),
            ),
            shape=(n_out * n_in, n_cols),
        )
    else:
        Q = sp.csr_matrix((n_out * n_in, 0))
    logger.debug(
        f"{group.name} basis {rep_text(rep_in)} -> {rep_text(rep_out)}: "
        f"{len(outs)}x{len(ins)} blocks, rank {n_cols}"
    )
    return EquivariantBasis(Q, n_in, n_out, tolerance)


def bias_basis(
    group: GroupSpec,
    rep_out: Rep,
    cache: Optional[BasisCache] = None,
    tolerance: float = TOLERANCE,
) -> EquivariantBasis:
    """Basis of invariant vectors ρ_out(g)v = v, as maps Scalar -> rep_out."""
    return equivariant_basis(group, Scalar(), rep_out, cache, tolerance)


def project_equivariant(basis: EquivariantBasis, W: np.ndarray) -> np.ndarray:
    """reshape(Q Qᵀ vec(W)); the complement is ``W - project_equivariant(basis, W)``."""
    return basis.weight(basis.coordinates(W))


def max_constraint_violation(
    basis: EquivariantBasis,
    group: GroupSpec,
    rep_in: Rep,
    rep_out: Rep,
    rng: np.random.Generator,
    samples: int = 20,
) -> float:
    """Worst relative violation ‖ρ_out(g)W − Wρ_in(g)‖/‖W‖ over sampled g.

    W is a random combination of basis columns; a rank-0 basis reports 0.
    """
    if basis.rank == 0:
        return 0.0
    W = basis.weight(rng.standard_normal(basis.rank))
    norm = np.linalg.norm(W)
    worst = 0.0
    for _ in range(samples):
        g = sample_group_element(group, rng)
        residual = rho_of(rep_out, g) @ W - W @ rho_of(rep_in, g)
        worst = max(worst, float(np.linalg.norm(residual) / norm))
    return worst
