"""Double spring pendulum in 3D, with optional wind.

The state is z = (x₁, x₂, p₁, p₂) ∈ R¹². The Hamiltonian is

    H₀ = ‖p₁‖²/2m₁ + ‖p₂‖²/2m₂
         + ½k₁(‖x₁‖ − ℓ₁)² + ½k₂(‖x₁ − x₂‖ − ℓ₂)² − m₁gᵀx₁ − m₂gᵀx₂
    H  = H₀ + ε(−wᵀx₁ − wᵀx₂)

with g = (0, 0, −9.81) the gravitational acceleration. Gravity and the
springs are symmetric under rotations about the z axis (and the reflection
y -> -y); horizontal wind breaks that symmetry.

Trajectories follow ż = J∇H = (∂H/∂p, −∂H/∂x) and are integrated with
fixed-step RK4, either on numpy arrays (data generation) or on tape tensors
(training a learned Hamiltonian).
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Tuple, Union

import numpy as np
import pandas as pd

from ..autodiff import tensor as T
from ..autodiff.tensor import Tape, Tensor
from ..core.errors import NumericalError, StructuralError
from ..models.equivariance import rel_err
from ..symmetry.groups import GroupSpec
from ..symmetry.reps import Base, Rep, Scalar, copies

STATE_DIM = 12
CHUNK_LENGTH = 5
TIME_STEP = 0.2
SUBSTEPS = 10
WIND_STRENGTH = 0.01
FORMULA_VERSION = "pendulum-1"

logger = logging.getLogger(__name__)

State = Union[np.ndarray, Tensor]


@dataclass(frozen=True)
class HamiltonianSystem:
    m1: float = 1.0
    m2: float = 1.0
    k1: float = 10.0
    k2: float = 10.0
    l1: float = 1.0
    l2: float = 1.0
    g: Tuple[float, float, float] = (0.0, 0.0, -9.81)
    w: Tuple[float, float, float] = (-8.0, -5.0, 0.0)
    eps: float = 0.0

    def __post_init__(self) -> None:
        for name in ("m1", "m2", "k1", "k2", "l1", "l2"):
            if getattr(self, name) <= 0:
                raise StructuralError(f"{name} must be positive")
        if self.eps < 0:
            raise StructuralError(f"eps must be >= 0, got {self.eps}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def pendulum_system(windy: bool = False) -> HamiltonianSystem:
    return HamiltonianSystem(eps=WIND_STRENGTH if windy else 0.0)


def pendulum_reps(group: GroupSpec) -> Tuple[Rep, Rep]:
    """V^4 (x₁, x₂, p₁, p₂) -> R (the energy)."""
    return copies(Base(group.base_dim), 4), Scalar()


@dataclass
class PendulumDataset:
    """Trajectory chunks of shape (n, L, 12) sampled every ``dt``."""

    train: np.ndarray
    test: np.ndarray
    dt: float
    system: HamiltonianSystem
    metadata: Dict[str, Any] = field(default_factory=dict)


def _split(z: np.ndarray):
    return z[..., 0:3], z[..., 3:6], z[..., 6:9], z[..., 9:12]


def hamiltonian(sys: HamiltonianSystem, z: np.ndarray) -> np.ndarray:
    """Energy of a state (12,) or a batch (..., 12).

    ``sys.g`` is the gravitational acceleration, so the gravity term is
    −m₁gᵀx₁ − m₂gᵀx₂: with g = (0, 0, −9.81) the energy grows with height.
    Wind enters the same way, as −ε·wᵀ(x₁ + x₂).
    """
    z = np.asarray(z, dtype=np.float64)
    x1, x2, p1, p2 = _split(z)
    g = np.asarray(sys.g)
    w = np.asarray(sys.w)
    kinetic = (p1 * p1).sum(-1) / (2 * sys.m1) + (p2 * p2).sum(-1) / (2 * sys.m2)
    r1 = np.linalg.norm(x1, axis=-1)
    r12 = np.linalg.norm(x1 - x2, axis=-1)
    potential = (
        0.5 * sys.k1 * (r1 - sys.l1) ** 2
        + 0.5 * sys.k2 * (r12 - sys.l2) ** 2
        - sys.m1 * x1 @ g
        - sys.m2 * x2 @ g
    )
    wind = -(x1 @ w) - (x2 @ w)
    return kinetic + potential + sys.eps * wind


def true_dynamics(sys: HamiltonianSystem, z: np.ndarray) -> np.ndarray:
    """Analytic ż = (∂H/∂p, −∂H/∂x) for a state or batch of states."""
    z = np.asarray(z, dtype=np.float64)
    x1, x2, p1, p2 = _split(z)
    g = np.asarray(sys.g)
    w = np.asarray(sys.w)
    d12 = x1 - x2
    r1 = np.linalg.norm(x1, axis=-1, keepdims=True)
    r12 = np.linalg.norm(d12, axis=-1, keepdims=True)
    if np.any(r1 == 0) or np.any(r12 == 0):
        logger.warning("Spring singularity: zero-length spring in pendulum state")
    with np.errstate(divide="ignore", invalid="ignore"):
        f1 = sys.k1 * (r1 - sys.l1) * x1 / r1
        f12 = sys.k2 * (r12 - sys.l2) * d12 / r12
    dH_dx1 = f1 + f12 - sys.m1 * g - sys.eps * w
    dH_dx2 = -f12 - sys.m2 * g - sys.eps * w
    return np.concatenate([p1 / sys.m1, p2 / sys.m2, -dH_dx1, -dH_dx2], axis=-1)


def hamiltonian_tensor(sys: HamiltonianSystem, z: Tensor) -> Tensor:
    """The same energy on a batch (N, 12) expressed with tape primitives."""
    rows = slice(None)
    x1 = T.getitem(z, (rows, slice(0, 3)))
    x2 = T.getitem(z, (rows, slice(3, 6)))
    p1 = T.getitem(z, (rows, slice(6, 9)))
    p2 = T.getitem(z, (rows, slice(9, 12)))
    g = np.asarray(sys.g)
    w = np.asarray(sys.w)

    kinetic = T.add(
        T.scale(T.tsum(T.square(p1), axis=1), 1.0 / (2 * sys.m1)),
        T.scale(T.tsum(T.square(p2), axis=1), 1.0 / (2 * sys.m2)),
    )
    r1 = T.sqrt(T.tsum(T.square(x1), axis=1))
    r12 = T.sqrt(T.tsum(T.square(T.sub(x1, x2)), axis=1))
    springs = T.add(
        T.scale(T.square(T.sub(r1, sys.l1)), 0.5 * sys.k1),
        T.scale(T.square(T.sub(r12, sys.l2)), 0.5 * sys.k2),
    )
    gravity = T.neg(
        T.add(T.scale(T.matmul(x1, g), sys.m1), T.scale(T.matmul(x2, g), sys.m2))
    )
    energy = T.add(T.add(kinetic, springs), gravity)
    if sys.eps:
        wind = T.neg(T.add(T.matmul(x1, w), T.matmul(x2, w)))
        energy = T.add(energy, T.scale(wind, sys.eps))
    return energy


def _check_finite(z: State, step: int) -> None:
    data = z.data if isinstance(z, Tensor) else z
    if not np.all(np.isfinite(data)):
        raise NumericalError(f"Non-finite state at integration step {step}")


def rk4_step(f: Callable[[State], State], z: State, dt: float) -> State:
    k1 = f(z)
    k2 = f(z + k1 * (dt / 2))
    k3 = f(z + k2 * (dt / 2))
    k4 = f(z + k3 * dt)
    return z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6)


def rollout(
    f: Callable[[State], State], z0: State, dt: float, steps: int
) -> List[State]:
    """States z₀, z₁, …, z_steps of fixed-step RK4 (arrays or tape tensors).

    Raises:
        StructuralError: If dt is not positive
        NumericalError: If a state becomes NaN/Inf (message names the step)
    """
    if dt <= 0:
        raise StructuralError(f"Time step must be positive, got {dt}")
    states = [z0]
    z = z0
    for step in range(1, steps + 1):
        z = rk4_step(f, z, dt)
        _check_finite(z, step)
        states.append(z)
    return states


def integrate_rk4(
    f: Callable[[np.ndarray], np.ndarray], z0: np.ndarray, dt: float, steps: int
) -> np.ndarray:
    """Numpy RK4 trajectory of shape (steps + 1, *z0.shape)."""
    return np.stack(rollout(f, np.asarray(z0, dtype=np.float64), dt, steps))


def initial_conditions(
    n: int, rng: np.random.Generator, sys: HamiltonianSystem
) -> np.ndarray:
    """Near-hanging starts: downward-biased unit directions plus noise."""
    down = np.array([0.0, 0.0, -1.5])

    def unit(k: int) -> np.ndarray:
        v = rng.standard_normal((k, 3)) + down
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    x1 = sys.l1 * unit(n) + 0.2 * rng.standard_normal((n, 3))
    x2 = x1 + sys.l2 * unit(n) + 0.2 * rng.standard_normal((n, 3))
    p1 = 0.5 * rng.standard_normal((n, 3))
    p2 = 0.5 * rng.standard_normal((n, 3))
    return np.concatenate([x1, x2, p1, p2], axis=1)


def gen_pendulum(
    sys: HamiltonianSystem,
    n_train: int = 500,
    n_test: int = 500,
    rng: np.random.Generator = None,
    dt: float = TIME_STEP,
    length: int = CHUNK_LENGTH,
    substeps: int = SUBSTEPS,
) -> PendulumDataset:
    """Ground-truth chunks integrated at dt/substeps and sampled every dt."""
    rng = rng if rng is not None else np.random.default_rng(0)
    n = n_train + n_test
    z0 = initial_conditions(n, rng, sys)
    fine = integrate_rk4(
        lambda z: true_dynamics(sys, z), z0, dt / substeps, (length - 1) * substeps
    )
    chunks = np.transpose(fine[::substeps], (1, 0, 2))
    metadata = {
        "formula_version": FORMULA_VERSION,
        "system": sys.to_dict(),
        "dt": dt,
        "length": length,
        "substeps": substeps,
        "n_train": n_train,
        "n_test": n_test,
    }
    logger.info(f"Generated {n} pendulum chunks (eps={sys.eps})")
    return PendulumDataset(chunks[:n_train], chunks[n_train:], dt, sys, metadata)


EnergyFn = Callable[[Tensor], Tensor]


def hnn_dynamics(
    energy: EnergyFn, z: Tensor, tape: Tape, create_graph: bool = True
) -> Tensor:
    """ż = (∂H/∂p, −∂H/∂x) of a learned energy, with ∂H/∂z taken on the tape."""
    if z.node is None:
        z = tape.watch(z.data)
    total = T.tsum(energy(z))
    (grad,) = tape.grad(total, [z], create_graph=create_graph)
    rows = slice(None)
    dH_dx = T.getitem(grad, (rows, slice(0, 6)))
    dH_dp = T.getitem(grad, (rows, slice(6, 12)))
    return T.concat([dH_dp, T.neg(dH_dx)], axis=1)


def hnn_rollout_loss(
    energy: EnergyFn, chunks: np.ndarray, tape: Tape, dt: float = TIME_STEP
) -> Tensor:
    """MSE between an RK4 rollout of the learned dynamics and the chunks.

    The rollout starts from each chunk's first state and runs L − 1 steps;
    the error is averaged over steps, chunks and coordinates.
    """
    chunks = np.asarray(chunks, dtype=np.float64)
    if chunks.ndim != 3 or chunks.shape[2] != STATE_DIM:
        raise StructuralError(f"Chunks must have shape (n, L, 12), got {chunks.shape}")
    steps = chunks.shape[1] - 1
    z0 = tape.watch(chunks[:, 0])
    states = rollout(lambda z: hnn_dynamics(energy, z, tape), z0, dt, steps)
    predicted = T.concat([T.reshape(s, (1,) + s.shape) for s in states[1:]], axis=0)
    target = np.transpose(chunks[:, 1:], (1, 0, 2))
    return T.mean(T.square(T.sub(predicted, target)))


def learned_trajectory(
    energy: EnergyFn, z0: np.ndarray, dt: float, steps: int
) -> np.ndarray:
    """Numpy rollout (steps + 1, n, 12) of a learned energy, no graph kept."""

    def f(z: np.ndarray) -> np.ndarray:
        tape = Tape()
        return hnn_dynamics(energy, tape.watch(z), tape, create_graph=False).data

    return integrate_rk4(f, np.atleast_2d(z0), dt, steps)


def rollout_relative_error(pred: np.ndarray, true: np.ndarray) -> float:
    """Geometric mean over steps t >= 1 of RelErr(ẑ_t, z_t), in percent.

    Accepts single trajectories (L, 12) or batches (n, L, 12); batches report
    the mean of the per-trajectory values.
    """
    pred = np.asarray(pred, dtype=np.float64)
    true = np.asarray(true, dtype=np.float64)
    if pred.shape != true.shape:
        raise StructuralError(f"Shapes {pred.shape} and {true.shape} differ")
    if pred.ndim == 3:
        per_trajectory = [rollout_relative_error(p, t) for p, t in zip(pred, true)]
        return float(np.mean(per_trajectory))
    errors = np.array([rel_err(p, t) for p, t in zip(pred[1:], true[1:])])
    if np.any(errors == 0):
        return 0.0
    return float(100.0 * np.exp(np.mean(np.log(errors))))


def rotate_state_about_z(z: np.ndarray, angle: float) -> np.ndarray:
    """Apply the same z-axis rotation to x₁, x₂, p₁ and p₂."""
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    z = np.asarray(z, dtype=np.float64)
    return (z.reshape(*z.shape[:-1], 4, 3) @ R.T).reshape(z.shape)


def symmetry_witness_pendulum(
    sys: HamiltonianSystem, rng: np.random.Generator, samples: int = 20
) -> float:
    """Largest relative change |H(Rz) − H(z)| / |H(z)| over z-axis rotations."""
    z = initial_conditions(samples, rng, sys)
    angles = rng.uniform(0.3, 2 * np.pi - 0.3, size=samples)
    worst = 0.0
    for zi, angle in zip(z, angles):
        h = hamiltonian(sys, zi)
        h_rot = hamiltonian(sys, rotate_state_about_z(zi, angle))
        worst = max(worst, float(abs(h_rot - h) / max(abs(h), 1e-12)))
    return worst


def pendulum_frame(chunks: np.ndarray) -> pd.DataFrame:
    """One row per chunk step: chunk, step, then the 12 state coordinates."""
    n, length, _ = chunks.shape
    names = [f"{part}_{axis}" for part in ("x1", "x2", "p1", "p2") for axis in "xyz"]
    frame = pd.DataFrame(chunks.reshape(n * length, STATE_DIM), columns=names)
    frame.insert(0, "step", np.tile(np.arange(length), n))
    frame.insert(0, "chunk", np.repeat(np.arange(n), length))
    return frame
