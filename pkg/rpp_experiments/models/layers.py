"""Network layers for MLP, EMLP and RPP models.

Every layer declares its parameters as (name, shape, pathway) where pathway
"a" is the equivariant path and "b" the unconstrained path. The model decides
which prior variance each pathway gets (RPP: σ_a² / σ_b²; EMLP: σ_a²
everywhere; MLP: σ_b² everywhere).

Hidden layers of equivariant models carry scalars, then n₁ copies of the base
rep V, then n₂ copies of V⊗V, followed by one gate scalar per non-scalar copy
in the pre-activation.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..autodiff import tensor as T
from ..autodiff.tensor import Tensor
from ..core.errors import StructuralError
from ..symmetry.basis import EquivariantBasis
from ..symmetry.reps import Base, Rep, Scalar, copies, direct_sum

logger = logging.getLogger(__name__)

ParamSpec = Tuple[str, Tuple[int, ...], str]


@dataclass(frozen=True)
class HiddenAllocation:
    """Channel counts of one hidden layer."""

    n_scalars: int
    n_vectors: int
    n_matrices: int
    base_dim: int

    @property
    def dim(self) -> int:
        d = self.base_dim
        return self.n_scalars + self.n_vectors * d + self.n_matrices * d * d

    @property
    def n_gates(self) -> int:
        return self.n_vectors + self.n_matrices

    def rep(self) -> Rep:
        parts: List[Rep] = []
        v = Base(self.base_dim)
        if self.n_scalars:
            parts.append(copies(Scalar(), self.n_scalars))
        if self.n_vectors:
            parts.append(copies(v, self.n_vectors))
        if self.n_matrices:
            parts.append(copies(v * v, self.n_matrices))
        if not parts:
            raise StructuralError("Hidden allocation is empty")
        return direct_sum(*parts)

    def gated_rep(self) -> Rep:
        """Pre-activation rep: the hidden rep followed by its gate scalars."""
        if self.n_gates == 0:
            return self.rep()
        return direct_sum(self.rep(), copies(Scalar(), self.n_gates))

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


def allocate_hidden(width: int, base_dim: int) -> HiddenAllocation:
    """Split ``width`` evenly over tensor ranks 0, 1 and 2.

    Each rank gets a budget of ⌊width/3⌋ dimensions; ranks 2 and 1 take as
    many whole copies as fit and scalars take the rest.
    """
    if width < 1:
        raise StructuralError(f"Hidden width must be positive, got {width}")
    budget = width // 3
    n_matrices = budget // (base_dim * base_dim)
    n_vectors = budget // base_dim
    n_scalars = width - n_matrices * base_dim * base_dim - n_vectors * base_dim
    return HiddenAllocation(n_scalars, n_vectors, n_matrices, base_dim)


class RPPLinear:
    """Linear layer W = reshape(Qβ) + B with bias Q_b·β_b + b.

    Either pathway can be switched off: EMLPLinear keeps only the equivariant
    path and DenseLinear only the free one.
    """

    equivariant = True
    free = True

    def __init__(
        self, name: str, basis: EquivariantBasis, bias_basis: Optional[EquivariantBasis]
    ) -> None:
        if bias_basis is not None and (
            bias_basis.n_in != 1 or bias_basis.n_out != basis.n_out
        ):
            raise StructuralError(
                f"{name}: bias basis ({bias_basis.n_out}, {bias_basis.n_in}) does not "
                f"match layer output {basis.n_out}"
            )
        self.name = name
        self.basis = basis
        self.bias_basis = bias_basis
        self.n_in = basis.n_in
        self.n_out = basis.n_out

    def param_specs(self) -> List[ParamSpec]:
        specs: List[ParamSpec] = []
        if self.equivariant and self.basis.rank:
            specs.append((f"{self.name}.beta", (self.basis.rank,), "a"))
        if self.free:
            specs.append((f"{self.name}.B", (self.n_out, self.n_in), "b"))
        if self.equivariant and self.bias_basis is not None and self.bias_basis.rank:
            specs.append((f"{self.name}.bias_beta", (self.bias_basis.rank,), "a"))
        if self.free:
            specs.append((f"{self.name}.bias_b", (self.n_out,), "b"))
        return specs

    def init(self, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        std = 1.0 / np.sqrt(self.n_in)
        values = {}
        for name, shape, _ in self.param_specs():
            if ".bias" in name:
                values[name] = np.zeros(shape)
            else:
                values[name] = std * rng.standard_normal(shape)
        return values

    def weight(self, t: Dict[str, Tensor]) -> Tensor:
        W = None
        beta = t.get(f"{self.name}.beta")
        if beta is not None:
            W = T.reshape(T.sparse_matvec(self.basis.Q, beta), (self.n_out, self.n_in))
        B = t.get(f"{self.name}.B")
        if B is not None:
            W = B if W is None else T.add(W, B)
        if W is None:
            W = Tensor(np.zeros((self.n_out, self.n_in)))
        return W

    def bias(self, t: Dict[str, Tensor]) -> Optional[Tensor]:
        b = None
        bias_beta = t.get(f"{self.name}.bias_beta")
        if bias_beta is not None:
            b = T.sparse_matvec(self.bias_basis.Q, bias_beta)
        bias_b = t.get(f"{self.name}.bias_b")
        if bias_b is not None:
            b = bias_b if b is None else T.add(b, bias_b)
        return b

    def __call__(self, x: Tensor, t: Dict[str, Tensor]) -> Tensor:
        if x.shape[-1] != self.n_in:
            raise StructuralError(
                f"{self.name}: input of width {x.shape[-1]} does not match {self.n_in}"
            )
        y = T.matmul(x, T.transpose(self.weight(t)))
        b = self.bias(t)
        return y if b is None else T.add(y, b)


class EMLPLinear(RPPLinear):
    free = False


class DenseLinear(RPPLinear):
    equivariant = False


class GatedNonlinearity:
    """Swish on scalar channels; sigmoid(gate)-scaled non-scalar blocks.

    Both cases reduce to ``value · sigmoid(source)`` where the source of a
    scalar is the scalar itself and the source of a block coordinate is the
    block's gate, so the whole activation is a single gather.
    """

    def __init__(self, name: str, allocation: HiddenAllocation) -> None:
        self.name = name
        self.allocation = allocation
        hidden = allocation.dim
        d = allocation.base_dim
        source = np.arange(hidden)
        gate = hidden
        offset = allocation.n_scalars
        for width in [d] * allocation.n_vectors + [d * d] * allocation.n_matrices:
            source[offset : offset + width] = gate
            offset += width
            gate += 1
        self.hidden = hidden
        self.source = source

    def param_specs(self) -> List[ParamSpec]:
        return []

    def init(self, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        return {}

    def gated(self, pre: Tensor) -> Tensor:
        values = T.getitem(pre, (slice(None), slice(0, self.hidden)))
        gates = T.sigmoid(T.getitem(pre, (slice(None), self.source)))
        return T.mul(values, gates)

    def __call__(self, pre: Tensor, t: Dict[str, Tensor]) -> Tensor:
        return self.gated(pre)


class RPPNonlinearity(GatedNonlinearity):
    """Gated nonlinearity plus α·swish on the hidden values; α = 0 is the pure gate."""

    def param_specs(self) -> List[ParamSpec]:
        return [(f"{self.name}.alpha", (), "b")]

    def init(self, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        return {f"{self.name}.alpha": np.zeros(())}

    def __call__(self, pre: Tensor, t: Dict[str, Tensor]) -> Tensor:
        out = self.gated(pre)
        alpha = t.get(f"{self.name}.alpha")
        if alpha is None:
            return out
        values = T.getitem(pre, (slice(None), slice(0, self.hidden)))
        return T.add(out, T.mul(alpha, T.swish(values)))


class SwishNonlinearity:
    def __init__(self, name: str) -> None:
        self.name = name

    def param_specs(self) -> List[ParamSpec]:
        return []

    def init(self, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        return {}

    def __call__(self, x: Tensor, t: Dict[str, Tensor]) -> Tensor:
        return T.swish(x)


class BilinearBlock:
    """Residual equivariant products of hidden channels.

    Adds scalar×vector and scalar×matrix channel mixings and the outer product
    of vector channels into matrix channels (V⊗V). Every product is taken per
    spatial component with ``bilinear_contract``, so channel mixing never
    touches the component index and equivariance is preserved.
    """

    def __init__(self, name: str, allocation: HiddenAllocation) -> None:
        self.name = name
        self.allocation = allocation
        n0, n1, n2 = allocation.n_scalars, allocation.n_vectors, allocation.n_matrices
        d = allocation.base_dim
        self.hidden = allocation.dim
        self.scalar_index = np.arange(n0)
        vec_start = n0
        mat_start = n0 + n1 * d
        # vector_index[p] lists component p of every vector channel
        self.vector_index = [vec_start + np.arange(n1) * d + p for p in range(d)]
        self.matrix_index = [
            [mat_start + np.arange(n2) * d * d + p * d + q for q in range(d)]
            for p in range(d)
        ]

    def param_specs(self) -> List[ParamSpec]:
        n0, n1, n2 = (
            self.allocation.n_scalars,
            self.allocation.n_vectors,
            self.allocation.n_matrices,
        )
        specs: List[ParamSpec] = []
        if n0 and n1:
            specs.append((f"{self.name}.sv", (n1, n0, n1), "a"))
        if n0 and n2:
            specs.append((f"{self.name}.sm", (n2, n0, n2), "a"))
        if n1 and n2:
            specs.append((f"{self.name}.vv", (n2, n1, n1), "a"))
        return specs

    def init(self, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        return {name: np.zeros(shape) for name, shape, _ in self.param_specs()}

    def __call__(self, h: Tensor, t: Dict[str, Tensor]) -> Tensor:
        specs = self.param_specs()
        if not specs:
            return h
        batch = h.shape[0]
        shape = (batch, self.hidden)
        rows = slice(None)
        scalars = T.getitem(h, (rows, self.scalar_index))
        out = h
        d = self.allocation.base_dim

        sv = t.get(f"{self.name}.sv")
        if sv is not None:
            for p in range(d):
                idx = self.vector_index[p]
                x_p = T.getitem(h, (rows, idx))
                update = T.bilinear_contract(scalars, x_p, sv)
                out = T.add(out, T.embed(update, (rows, idx), shape))

        sm = t.get(f"{self.name}.sm")
        vv = t.get(f"{self.name}.vv")
        if sm is not None or vv is not None:
            for p in range(d):
                for q in range(d):
                    idx = self.matrix_index[p][q]
                    update = None
                    if sm is not None:
                        y_pq = T.getitem(h, (rows, idx))
                        update = T.bilinear_contract(scalars, y_pq, sm)
                    if vv is not None:
                        x_p = T.getitem(h, (rows, self.vector_index[p]))
                        x_q = T.getitem(h, (rows, self.vector_index[q]))
                        term = T.bilinear_contract(x_p, x_q, vv)
                        update = term if update is None else T.add(update, term)
                    out = T.add(out, T.embed(update, (rows, idx), shape))
        return out
