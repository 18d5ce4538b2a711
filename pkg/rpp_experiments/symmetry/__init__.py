"""Groups, representations and equivariant basis solvers."""

from .basis import (
    EquivariantBasis,
    bias_basis,
    build_constraints,
    equivariant_basis,
    project_equivariant,
    solve_basis,
)
from .catalog import mujoco_catalog
from .conv import conv_toeplitz_basis
from .groups import GroupSpec, get_group, sample_group_element
from .reps import Base, Pseudoscalar, Rep, Scalar, drho_of, parse_rep, rho_of

__all__ = [
    "GroupSpec",
    "get_group",
    "sample_group_element",
    "Rep",
    "Scalar",
    "Pseudoscalar",
    "Base",
    "rho_of",
    "drho_of",
    "parse_rep",
    "mujoco_catalog",
    "EquivariantBasis",
    "build_constraints",
    "solve_basis",
    "equivariant_basis",
    "bias_basis",
    "project_equivariant",
    "conv_toeplitz_basis",
]
