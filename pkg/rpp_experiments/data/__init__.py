"""Synthetic inertia and pendulum datasets, tabular CSV ingestion and dataset files."""

from .export import write_dataset_files
from .inertia import InertiaDataset, gen_inertia, inertia_reps, symmetry_witness_inertia
from .pendulum import (
    HamiltonianSystem,
    PendulumDataset,
    gen_pendulum,
    hamiltonian,
    hnn_rollout_loss,
    integrate_rk4,
    pendulum_system,
    rollout_relative_error,
    symmetry_witness_pendulum,
    true_dynamics,
)
from .tabular import (
    TabularDataset,
    generate_shifted_patterns,
    ingest_csv_regression,
    read_tabular_dataset,
    write_tabular_dataset,
)

__all__ = [
    "InertiaDataset",
    "gen_inertia",
    "inertia_reps",
    "symmetry_witness_inertia",
    "HamiltonianSystem",
    "PendulumDataset",
    "gen_pendulum",
    "hamiltonian",
    "hnn_rollout_loss",
    "integrate_rk4",
    "pendulum_system",
    "rollout_relative_error",
    "symmetry_witness_pendulum",
    "true_dynamics",
    "TabularDataset",
    "generate_shifted_patterns",
    "ingest_csv_regression",
    "read_tabular_dataset",
    "write_tabular_dataset",
    "write_dataset_files",
]
