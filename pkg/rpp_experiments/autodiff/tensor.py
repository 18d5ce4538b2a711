"""Tape-based reverse-mode automatic differentiation over numpy arrays.

Every primitive records a node on its tape holding the inputs and a backward
rule. Backward rules are written with the same primitives, so running a
backward pass with ``create_graph=True`` records the gradient computation
itself and it can be differentiated again (Hessian-vector products, gradients
of losses that contain ∂H/∂z).

Arrays are always float64. A tape is single-owner; use one tape per training
step and per worker.
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ..core.errors import NumericalError, StructuralError

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, float, int, Sequence[float]]
BackwardFn = Callable[["Tensor", "Tensor", Tuple[bool, ...]], List[Optional["Tensor"]]]


class Node:
    __slots__ = ("index", "op", "inputs", "backward", "output")

    def __init__(self, index: int, op: str, inputs: Tuple["Tensor", ...], backward):
        self.index = index
        self.op = op
        self.inputs = inputs
        self.backward = backward
        self.output: Optional["Tensor"] = None


class Tensor:
    """A float64 array, optionally recorded on a tape.

    Attributes:
        data: The underlying numpy array
        tape: Tape the tensor belongs to (None for free constants)
        node: Recorded node (None for constants)
    """

    __slots__ = ("data", "tape", "node")
    __array_ufunc__ = None

    def __init__(
        self,
        data: ArrayLike,
        tape: Optional["Tape"] = None,
        node: Optional[Node] = None,
    ) -> None:
        self.data = np.asarray(data, dtype=np.float64)
        self.tape = tape
        self.node = node

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def tracked(self) -> bool:
        return self.node is not None

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise StructuralError(
                f"item() needs a single value, got shape {self.shape}"
            )
        return float(self.data.reshape(-1)[0])

    def __repr__(self) -> str:
        state = f"node={self.node.index}" if self.node is not None else "const"
        return f"Tensor(shape={self.shape}, {state})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        if np.isscalar(other):
            return scale(self, float(other))
        return mul(self, other)

    def __rmul__(self, other):
        if np.isscalar(other):
            return scale(self, float(other))
        return mul(other, self)

    def __truediv__(self, other):
        if np.isscalar(other):
            return scale(self, 1.0 / float(other))
        return mul(self, reciprocal(_lift(other, self.tape)))

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, index):
        return getitem(self, index)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        return tsum(self, axis, keepdims)

    def mean(self) -> "Tensor":
        return mean(self)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)


class Tape:
    """Records primitives in execution order and runs reverse passes.

    Attributes:
        nodes: Recorded nodes in topological (execution) order
        params: Registered parameters by name
        debug: Check every recorded result for NaN/Inf
        recording: False while a non-differentiable backward pass runs
    """

    def __init__(self, debug: bool = False) -> None:
        self.nodes: List[Node] = []
        self.params: Dict[str, Tensor] = {}
        self.debug = debug
        self.recording = True

    def __len__(self) -> int:
        return len(self.nodes)

    def _leaf(self, value: ArrayLike, op: str) -> Tensor:
        node = Node(len(self.nodes), op, (), None)
        tensor = Tensor(value, self, node)
        node.output = tensor
        self.nodes.append(node)
        return tensor

    def parameter(self, name: str, value: ArrayLike) -> Tensor:
        """Register a named trainable parameter as a leaf."""
        if name in self.params:
            raise StructuralError(f"Parameter '{name}' is already registered")
        tensor = self._leaf(np.array(value, dtype=np.float64), "param")
        self.params[name] = tensor
        return tensor

    def watch(self, value: ArrayLike) -> Tensor:
        """Record an input as a differentiable leaf (e.g. the state z)."""
        if isinstance(value, Tensor):
            value = value.data
        return self._leaf(np.array(value, dtype=np.float64), "watch")

    def constant(self, value: ArrayLike) -> Tensor:
        return Tensor(value, self, None)

    def reset(self) -> None:
        self.nodes.clear()
        self.params.clear()
        self.recording = True

    def record(
        self,
        op: str,
        value: np.ndarray,
        inputs: Tuple[Tensor, ...],
        backward: BackwardFn,
    ) -> Tensor:
        if self.debug and not np.all(np.isfinite(value)):
            raise NumericalError(
                f"{op} produced NaN/Inf at node {len(self.nodes)} "
                f"(input shapes {[t.shape for t in inputs]})"
            )
        if not self.recording or not any(t.node is not None for t in inputs):
            return Tensor(value, self, None)
        node = Node(len(self.nodes), op, inputs, backward)
        out = Tensor(value, self, node)
        node.output = out
        self.nodes.append(node)
        return out

    def grad(
        self,
        output: Tensor,
        wrt: Sequence[Tensor],
        create_graph: bool = False,
        seed: Optional[Tensor] = None,
    ) -> List[Tensor]:
        """Gradients of ``output`` with respect to recorded tensors ``wrt``.

        Args:
            output: Tensor to differentiate (any shape when ``seed`` is given)
            wrt: Recorded tensors to differentiate against
            create_graph: Record the backward pass so it can be differentiated
            seed: Cotangent of the output (defaults to ones)

        Returns:
            One gradient per ``wrt`` entry (zeros if unreached)
        """
        results = [Tensor(np.zeros(t.shape), self) for t in wrt]
        wrt_index = {
            t.node.index: k for k, t in enumerate(wrt) if t.node is not None
        }
        if output.node is None or not wrt_index:
            return results
        if seed is None:
            seed = Tensor(np.ones(output.shape), self)

        lowest = min(wrt_index)
        top = output.node.index
        depends = set(wrt_index)
        for node in self.nodes[lowest : top + 1]:
            if any(t.node is not None and t.node.index in depends for t in node.inputs):
                depends.add(node.index)
        if top not in depends:
            return results

        previous = self.recording
        self.recording = create_graph
        try:
            grads: Dict[int, Tensor] = {top: seed}
            for index in range(top, lowest - 1, -1):
                g = grads.pop(index, None)
                if g is None:
                    continue
                if index in wrt_index:
                    results[wrt_index[index]] = g
                node = self.nodes[index]
                if not node.inputs:
                    continue
                needs = tuple(
                    t.node is not None and t.node.index in depends for t in node.inputs
                )
                if not any(needs):
                    continue
                parent_grads = node.backward(g, node.output, needs)
                for tensor, need, pg in zip(node.inputs, needs, parent_grads):
                    if not need or pg is None:
                        continue
                    key = tensor.node.index
                    grads[key] = add(grads[key], pg) if key in grads else pg
        finally:
            self.recording = previous
        return results

    def backward(self, output: Tensor) -> Dict[str, np.ndarray]:
        """Gradient map over every registered parameter (zeros if unreached).

        Raises:
            StructuralError: If ``output`` is not a scalar
        """
        if output.size != 1:
            raise StructuralError(
                f"backward needs a scalar output, got shape {output.shape}"
            )
        names = list(self.params)
        grads = self.grad(output, [self.params[n] for n in names])
        return {
            name: g.data.reshape(self.params[name].shape)
            for name, g in zip(names, grads)
        }


# ---------------------------------------------------------------------------
# Primitives


def _tape_of(*items) -> Optional[Tape]:
    for item in items:
        if isinstance(item, Tensor) and item.tape is not None:
            return item.tape
    return None


def _lift(value, tape: Optional[Tape]) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value, tape, None)


def _record(op: str, value: np.ndarray, inputs: Tuple[Tensor, ...], backward) -> Tensor:
    tape = _tape_of(*inputs)
    if tape is None:
        return Tensor(value)
    return tape.record(op, value, inputs, backward)


def _check_broadcast(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise StructuralError(
            f"{op}: shapes {a.shape} and {b.shape} do not match"
        ) from e


def add(a, b) -> Tensor:
    tape = _tape_of(a, b)
    a, b = _lift(a, tape), _lift(b, tape)
    _check_broadcast("add", a, b)

    def backward(g, out, needs):
        return [
            sum_to(g, a.shape) if needs[0] else None,
            sum_to(g, b.shape) if needs[1] else None,
        ]

    return _record("add", a.data + b.data, (a, b), backward)


def sub(a, b) -> Tensor:
    tape = _tape_of(a, b)
    a, b = _lift(a, tape), _lift(b, tape)
    _check_broadcast("sub", a, b)

    def backward(g, out, needs):
        return [
            sum_to(g, a.shape) if needs[0] else None,
            neg(sum_to(g, b.shape)) if needs[1] else None,
        ]

    return _record("sub", a.data - b.data, (a, b), backward)


def mul(a, b) -> Tensor:
    tape = _tape_of(a, b)
    a, b = _lift(a, tape), _lift(b, tape)
    _check_broadcast("mul", a, b)

    def backward(g, out, needs):
        return [
            sum_to(mul(g, b), a.shape) if needs[0] else None,
            sum_to(mul(g, a), b.shape) if needs[1] else None,
        ]

    return _record("mul", a.data * b.data, (a, b), backward)


def scale(x: Tensor, c: float) -> Tensor:
    def backward(g, out, needs):
        return [scale(g, c)]

    return _record("scale", x.data * c, (x,), backward)


def neg(x: Tensor) -> Tensor:
    def backward(g, out, needs):
        return [neg(g)]

    return _record("neg", -x.data, (x,), backward)


def matmul(a, b) -> Tensor:
    """Matrix product; 1-D operands are treated as a row (left) or column (right)."""
    tape = _tape_of(a, b)
    a, b = _lift(a, tape), _lift(b, tape)
    if a.ndim == 1:
        return reshape(matmul(reshape(a, (1, a.shape[0])), b), (-1,))
    if b.ndim == 1:
        return reshape(matmul(a, reshape(b, (b.shape[0], 1))), (-1,))
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise StructuralError(f"matmul: shapes {a.shape} and {b.shape} do not match")

    def backward(g, out, needs):
        return [
            matmul(g, transpose(b)) if needs[0] else None,
            matmul(transpose(a), g) if needs[1] else None,
        ]

    return _record("matmul", a.data @ b.data, (a, b), backward)


def permute(x: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))

    def backward(g, out, needs):
        return [permute(g, inverse)]

    return _record("permute", np.transpose(x.data, axes), (x,), backward)


def transpose(x: Tensor) -> Tensor:
    if x.ndim != 2:
        raise StructuralError(f"transpose needs a matrix, got shape {x.shape}")
    return permute(x, (1, 0))


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        value = x.data.reshape(tuple(shape))
    except ValueError as e:
        raise StructuralError(
            f"reshape: cannot view {x.shape} as {tuple(shape)}"
        ) from e
    original = x.shape

    def backward(g, out, needs):
        return [reshape(g, original)]

    return _record("reshape", value, (x,), backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tape = _tape_of(*tensors)
    parts = tuple(_lift(t, tape) for t in tensors)
    try:
        value = np.concatenate([t.data for t in parts], axis=axis)
    except ValueError as e:
        shapes = [t.shape for t in parts]
        raise StructuralError(f"concat: incompatible shapes {shapes}") from e
    bounds = np.cumsum([0] + [t.shape[axis] for t in parts])
    ndim = value.ndim
    ax = axis % ndim

    def backward(g, out, needs):
        grads = []
        for k, need in enumerate(needs):
            if not need:
                grads.append(None)
                continue
            index = [slice(None)] * ndim
            index[ax] = slice(int(bounds[k]), int(bounds[k + 1]))
            grads.append(getitem(g, tuple(index)))
        return grads

    return _record("concat", value, parts, backward)


def _is_basic(index) -> bool:
    items = index if isinstance(index, tuple) else (index,)
    return all(isinstance(i, (slice, int, type(None), type(Ellipsis))) for i in items)


def getitem(x: Tensor, index) -> Tensor:
    """Slice or gather; the adjoint is :func:`embed`."""
    shape = x.shape

    def backward(g, out, needs):
        return [embed(g, index, shape)]

    return _record("getitem", np.array(x.data[index]), (x,), backward)


def embed(x: Tensor, index, shape: Tuple[int, ...]) -> Tensor:
    """Scatter-add ``x`` into zeros of ``shape`` at ``index``."""
    value = np.zeros(shape)
    if _is_basic(index):
        value[index] += x.data
    else:
        np.add.at(value, index, x.data)

    def backward(g, out, needs):
        return [getitem(g, index)]

    return _record("embed", value, (x,), backward)


def _normalize_axes(axis, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(sorted(a % ndim for a in axis))


def tsum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, x.ndim)
    keep_shape = tuple(1 if i in axes else s for i, s in enumerate(x.shape))
    shape = x.shape

    def backward(g, out, needs):
        return [broadcast_to(reshape(g, keep_shape), shape)]

    value = np.sum(x.data, axis=axes, keepdims=keepdims)
    return _record("sum", np.asarray(value), (x,), backward)


def broadcast_to(x: Tensor, shape: Tuple[int, ...]) -> Tensor:
    original = x.shape

    def backward(g, out, needs):
        return [sum_to(g, original)]

    value = np.broadcast_to(x.data, shape).copy()
    return _record("broadcast_to", value, (x,), backward)


def sum_to(x: Tensor, shape: Tuple[int, ...]) -> Tensor:
    """Reduce a broadcast result back to ``shape`` (the adjoint of broadcasting)."""
    shape = tuple(shape)
    if x.shape == shape:
        return x
    lead = x.ndim - len(shape)
    axes = tuple(range(lead)) + tuple(
        lead + i for i, s in enumerate(shape) if s == 1 and x.shape[lead + i] != 1
    )
    return reshape(tsum(x, axes), shape)


def mean(x: Tensor) -> Tensor:
    return scale(tsum(x), 1.0 / max(x.size, 1))


def square(x: Tensor) -> Tensor:
    def backward(g, out, needs):
        return [mul(g, scale(x, 2.0))]

    return _record("square", x.data**2, (x,), backward)


def l2_norm_sq(x: Tensor) -> Tensor:
    return tsum(square(x))


def _stable_sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    positive = z >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-z[positive]))
    ez = np.exp(z[~positive])
    out[~positive] = ez / (1.0 + ez)
    return out


def sigmoid(x: Tensor) -> Tensor:
    def backward(g, out, needs):
        return [mul(g, mul(out, sub(1.0, out)))]

    return _record("sigmoid", _stable_sigmoid(x.data), (x,), backward)


def swish(x: Tensor) -> Tensor:
    return mul(x, sigmoid(x))


def reciprocal(x: Tensor) -> Tensor:
    def backward(g, out, needs):
        return [neg(mul(g, square(out)))]

    return _record("reciprocal", 1.0 / x.data, (x,), backward)


def sqrt(x: Tensor) -> Tensor:
    def backward(g, out, needs):
        return [scale(mul(g, reciprocal(out)), 0.5)]

    return _record("sqrt", np.sqrt(x.data), (x,), backward)


def sparse_matvec(matrix, v: Tensor) -> Tensor:
    """Constant (sparse or dense) matrix times a vector."""
    if v.ndim != 1 or matrix.shape[1] != v.shape[0]:
        raise StructuralError(
            f"sparse_matvec: matrix {matrix.shape} and vector {v.shape} do not match"
        )

    def backward(g, out, needs):
        return [sparse_matvec(matrix.T, g)]

    value = matrix @ v.data
    if sp.issparse(value):
        value = value.toarray()
    return _record("sparse_matvec", np.asarray(value).ravel(), (v,), backward)


def bilinear_contract(x, y, M) -> Tensor:
    """out[n, k] = Σ_ij M[k, i, j] x[n, i] y[n, j] for x (N, I), y (N, J), M (K, I, J)."""
    tape = _tape_of(x, y, M)
    x, y, M = _lift(x, tape), _lift(y, tape), _lift(M, tape)
    if (
        x.ndim != 2
        or y.ndim != 2
        or M.ndim != 3
        or x.shape[0] != y.shape[0]
        or M.shape[1:] != (x.shape[1], y.shape[1])
    ):
        raise StructuralError(
            f"bilinear_contract: shapes x{x.shape}, y{y.shape}, M{M.shape} do not match"
        )

    def backward(g, out, needs):
        return [
            bilinear_contract(g, y, permute(M, (1, 0, 2))) if needs[0] else None,
            bilinear_contract(g, x, permute(M, (2, 0, 1))) if needs[1] else None,
            outer3(g, x, y) if needs[2] else None,
        ]

    value = np.einsum("kij,ni,nj->nk", M.data, x.data, y.data)
    return _record("bilinear_contract", value, (x, y, M), backward)


def outer3(a, b, c) -> Tensor:
    """out[k, i, j] = Σ_n a[n, k] b[n, i] c[n, j]; adjoint partner of bilinear_contract."""
    tape = _tape_of(a, b, c)
    a, b, c = _lift(a, tape), _lift(b, tape), _lift(c, tape)
    if not (a.shape[0] == b.shape[0] == c.shape[0]):
        raise StructuralError(
            f"outer3: batch sizes of {a.shape}, {b.shape}, {c.shape} differ"
        )

    def backward(g, out, needs):
        return [
            bilinear_contract(b, c, g) if needs[0] else None,
            bilinear_contract(a, c, permute(g, (1, 0, 2))) if needs[1] else None,
            bilinear_contract(a, b, permute(g, (2, 0, 1))) if needs[2] else None,
        ]

    value = np.einsum("nk,ni,nj->kij", a.data, b.data, c.data)
    return _record("outer3", value, (a, b, c), backward)
