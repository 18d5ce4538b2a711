"""Model specification, assembly and forward evaluation."""

import copy
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ..autodiff.tensor import Tape, Tensor
from ..core.cache import BasisCache
from ..core.config import MODEL_KINDS
from ..core.errors import ConfigError, StructuralError
from ..symmetry.basis import EquivariantBasis, bias_basis, equivariant_basis
from ..symmetry.conv import conv_basis_multichannel, conv_bias_basis, identity_basis
from ..symmetry.groups import GroupSpec
from ..symmetry.reps import Rep, rep_text
from .layers import (
    BilinearBlock,
    DenseLinear,
    EMLPLinear,
    GatedNonlinearity,
    HiddenAllocation,
    RPPLinear,
    RPPNonlinearity,
    SwishNonlinearity,
    allocate_hidden,
)

logger = logging.getLogger(__name__)

LayerBases = Dict[str, Tuple[EquivariantBasis, Optional[EquivariantBasis]]]


@dataclass
class ModelSpec:
    """Architecture of one model.

    Equivariant kinds (emlp, rpp) need ``group``, ``rep_in`` and ``rep_out``;
    mlp only needs the dimensions (taken from the reps or ``n_in``/``n_out``);
    rpp-conv needs ``image_shape`` and ``n_out``.
    """

    kind: str
    rep_in: Optional[Rep] = None
    rep_out: Optional[Rep] = None
    group: Optional[GroupSpec] = None
    depth: int = 3
    width: int = 128
    sigma_a2: float = 1e5
    sigma_b2: float = 1.0
    n_in: Optional[int] = None
    n_out: Optional[int] = None
    image_shape: Optional[Tuple[int, int]] = None
    channels: int = 8

    @property
    def in_dim(self) -> int:
        if self.rep_in is not None:
            return self.rep_in.dim
        if self.image_shape is not None:
            return self.image_shape[0] * self.image_shape[1]
        if self.n_in is None:
            raise ConfigError("Model spec needs rep_in, image_shape or n_in")
        return self.n_in

    @property
    def out_dim(self) -> int:
        if self.rep_out is not None:
            return self.rep_out.dim
        if self.n_out is None:
            raise ConfigError("Model spec needs rep_out or n_out")
        return self.n_out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "group": self.group.name if self.group is not None else None,
            "rep_in": rep_text(self.rep_in) if self.rep_in is not None else None,
            "rep_out": rep_text(self.rep_out) if self.rep_out is not None else None,
            "n_in": self.in_dim,
            "n_out": self.out_dim,
            "depth": self.depth,
            "width": self.width,
            "sigma_a2": self.sigma_a2,
            "sigma_b2": self.sigma_b2,
            "image_shape": list(self.image_shape) if self.image_shape else None,
            "channels": self.channels,
        }


class Model:
    """A built network: ordered layers plus a flat parameter dictionary.

    Attributes:
        spec: The architecture
        layers: Callables ``layer(x, tensors)`` applied in order
        params: Parameter arrays by name
        pathways: "a" (equivariant path) or "b" (free path) per parameter
        hidden: Hidden allocation for equivariant kinds
        basis_ranks: Rank of each layer's weight basis
    """

    def __init__(
        self,
        spec: ModelSpec,
        layers: List[Any],
        params: Dict[str, np.ndarray],
        pathways: Dict[str, str],
        hidden: Optional[HiddenAllocation] = None,
        basis_ranks: Optional[Dict[str, int]] = None,
    ) -> None:
        self.spec = spec
        self.layers = layers
        self.params = params
        self.pathways = pathways
        self.hidden = hidden
        self.basis_ranks = basis_ranks or {}

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def variances(self) -> Dict[str, float]:
        """Prior variance of every parameter."""
        a2, b2 = self.spec.sigma_a2, self.spec.sigma_b2
        if self.kind == "mlp":
            return {name: b2 for name in self.params}
        if self.kind == "emlp":
            return {name: a2 for name in self.params}
        return {name: a2 if self.pathways[name] == "a" else b2 for name in self.params}

    def num_parameters(self) -> int:
        return int(sum(v.size for v in self.params.values()))

    def bind(self, tape: Tape) -> Dict[str, Tensor]:
        """Register every parameter on ``tape`` and return the tensors."""
        return {
            name: tape.parameter(name, value) for name, value in self.params.items()
        }

    def constants(self) -> Dict[str, Tensor]:
        return {name: Tensor(value) for name, value in self.params.items()}

    def __call__(
        self, x: Union[np.ndarray, Tensor], tensors: Optional[Dict[str, Tensor]] = None
    ) -> Tensor:
        if tensors is None:
            tensors = self.constants()
        if not isinstance(x, Tensor):
            tape = next((t.tape for t in tensors.values() if t.tape is not None), None)
            x = Tensor(x, tape)
        single = x.ndim == 1
        if single:
            x = x.reshape((1, x.shape[0]))
        if x.shape[1] != self.spec.in_dim:
            raise StructuralError(
                f"Input of width {x.shape[1]} does not match model input "
                f"{self.spec.in_dim}"
            )
        h = x
        for layer in self.layers:
            h = layer(h, tensors)
        return h.reshape((h.shape[1],)) if single else h

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self(np.asarray(x, dtype=np.float64)).data

    def set_params(self, values: Dict[str, np.ndarray]) -> None:
        for name, value in values.items():
            if name not in self.params:
                raise StructuralError(f"Unknown parameter '{name}'")
            value = np.asarray(value, dtype=np.float64)
            if value.shape != self.params[name].shape:
                raise StructuralError(
                    f"Parameter '{name}' has shape {self.params[name].shape}, "
                    f"got {value.shape}"
                )
            self.params[name] = value.copy()

    def copy(self) -> "Model":
        """Copy with independent parameter arrays (layers and bases are shared)."""
        clone = copy.copy(self)
        clone.params = {name: value.copy() for name, value in self.params.items()}
        return clone


def forward_rpp(model: Model, x: np.ndarray) -> np.ndarray:
    """Evaluate the model on one input vector (or a batch)."""
    return model.predict(x)


def _shape_basis(n_in: int, n_out: int) -> EquivariantBasis:
    return EquivariantBasis(sp.csr_matrix((n_out * n_in, 0)), n_in, n_out)


def _check_variances(spec: ModelSpec) -> None:
    if spec.sigma_a2 <= 0 or spec.sigma_b2 <= 0:
        raise ConfigError(
            f"Prior variances must be positive (sigma_a2={spec.sigma_a2}, "
            f"sigma_b2={spec.sigma_b2})"
        )


def _assemble(
    spec: ModelSpec,
    layers: List[Any],
    rng: np.random.Generator,
    hidden: Optional[HiddenAllocation] = None,
) -> Model:
    params: Dict[str, np.ndarray] = {}
    pathways: Dict[str, str] = {}
    ranks: Dict[str, int] = {}
    for layer in layers:
        for name, value in layer.init(rng).items():
            params[name] = value
        for name, _, pathway in layer.param_specs():
            pathways[name] = pathway
        if isinstance(layer, RPPLinear):
            ranks[layer.name] = layer.basis.rank if layer.equivariant else 0
            if layer.bias_basis is not None and layer.equivariant:
                ranks[f"{layer.name}.bias"] = layer.bias_basis.rank
    model = Model(spec, layers, params, pathways, hidden, ranks)
    logger.info(
        f"Built {spec.kind} model: {len(layers)} layers, "
        f"{model.num_parameters():,} parameters, basis ranks {ranks}"
    )
    return model


def _layer_bases(
    name: str,
    group: GroupSpec,
    rep_in: Rep,
    rep_out: Rep,
    bases: Optional[LayerBases],
    cache: Optional[BasisCache],
) -> Tuple[EquivariantBasis, EquivariantBasis]:
    if bases is not None and name in bases:
        weight, bias = bases[name]
        if (weight.n_in, weight.n_out) != (rep_in.dim, rep_out.dim):
            raise StructuralError(
                f"{name}: supplied basis maps {weight.n_in} -> {weight.n_out}, "
                f"rep chain needs {rep_in.dim} -> {rep_out.dim}"
            )
        if bias is None or bias.n_out != rep_out.dim:
            raise StructuralError(f"{name}: supplied bias basis does not match output")
        return weight, bias
    return (
        equivariant_basis(group, rep_in, rep_out, cache),
        bias_basis(group, rep_out, cache),
    )


def build_model(
    spec: ModelSpec,
    bases: Optional[LayerBases] = None,
    rng: Optional[np.random.Generator] = None,
    cache: Optional[BasisCache] = None,
) -> Model:
    """Assemble and initialize a model.

    Weights (β and B) start from N(0, 1/fan_in), biases and α at zero,
    bilinear weights at zero.

    Args:
        spec: Architecture
        bases: Precomputed (weight, bias) bases per linear layer name
        rng: Generator for initialization (default seed 0)
        cache: Basis cache used when bases have to be solved

    Raises:
        ConfigError: Unknown kind, missing reps or nonpositive variances
        StructuralError: Supplied bases inconsistent with the rep chain
    """
    if spec.kind not in MODEL_KINDS:
        raise ConfigError(f"Unknown model kind '{spec.kind}'")
    if spec.kind == "rpp-conv":
        return build_rpp_conv(spec, rng)
    _check_variances(spec)
    if spec.depth < 1 or spec.width < 1:
        raise ConfigError("depth and width must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(0)

    layers: List[Any] = []
    if spec.kind == "mlp":
        prev = spec.in_dim
        for i in range(spec.depth):
            shape = _shape_basis(prev, spec.width)
            layers.append(DenseLinear(f"layer{i}", shape, None))
            layers.append(SwishNonlinearity(f"act{i}"))
            prev = spec.width
        layers.append(
            DenseLinear(f"layer{spec.depth}", _shape_basis(prev, spec.out_dim), None)
        )
        return _assemble(spec, layers, rng)

    if spec.group is None or spec.rep_in is None or spec.rep_out is None:
        raise ConfigError(f"{spec.kind} models need a group, rep_in and rep_out")
    hidden = allocate_hidden(spec.width, spec.group.base_dim)
    hidden_rep = hidden.rep()
    gated_rep = hidden.gated_rep()
    linear_cls = RPPLinear if spec.kind == "rpp" else EMLPLinear
    nonlinearity_cls = RPPNonlinearity if spec.kind == "rpp" else GatedNonlinearity

    prev = spec.rep_in
    for i in range(spec.depth):
        name = f"layer{i}"
        weight, bias = _layer_bases(name, spec.group, prev, gated_rep, bases, cache)
        layers.append(linear_cls(name, weight, bias))
        layers.append(nonlinearity_cls(f"act{i}", hidden))
        layers.append(BilinearBlock(f"bil{i}", hidden))
        prev = hidden_rep
    name = f"layer{spec.depth}"
    weight, bias = _layer_bases(name, spec.group, prev, spec.rep_out, bases, cache)
    layers.append(linear_cls(name, weight, bias))
    return _assemble(spec, layers, rng, hidden)


def build_rpp_conv(spec: ModelSpec, rng: Optional[np.random.Generator] = None) -> Model:
    """RPP model whose equivariant path is a stack of zero-padded 3×3 convolutions.

    ``depth`` conv layers (1 -> C -> ... -> C channels) with swish, then a
    dense output layer whose equivariant path is the full weight space.

    Raises:
        ConfigError: If image dims are missing or below 3
    """
    _check_variances(spec)
    if spec.image_shape is None:
        raise ConfigError("rpp-conv needs image_shape")
    height, width = spec.image_shape
    if height < 3 or width < 3:
        raise ConfigError(f"Image dims must be at least 3x3, got {height}x{width}")
    rng = rng if rng is not None else np.random.default_rng(0)
    hw = height * width
    channels = spec.channels

    layers: List[Any] = []
    c_in = 1
    for i in range(spec.depth):
        basis = conv_basis_multichannel(height, width, channels, c_in)
        bias = conv_bias_basis(height, width, channels)
        layers.append(RPPLinear(f"layer{i}", basis, bias))
        layers.append(SwishNonlinearity(f"act{i}"))
        c_in = channels
    n_out = spec.out_dim
    layers.append(
        RPPLinear(
            f"layer{spec.depth}",
            identity_basis(c_in * hw, n_out),
            identity_basis(1, n_out),
        )
    )
    return _assemble(spec, layers, rng)
