"""Command-line interface utilities for RPP Experiments.

Handles argument parsing, help text generation, and CLI user interactions.
"""

import argparse
from typing import List, Optional

from .. import __version__
from ..core.config import LR_SCHEDULES, MODEL_KINDS, TASKS
from ..symmetry.groups import GROUP_CONSTRUCTORS

OUTPUT_FORMATS = ("csv", "json", "excel")
COMMANDS = (
    "gen-data",
    "train",
    "experiment",
    "ablate",
    "ensemble",
    "basis",
    "catalog",
    "ingest",
)


def _float_list(text: str) -> List[float]:
    """Parse ``1e-2,1,1e2`` into a list of floats."""
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Invalid number list '{text}': {e}")
    if not values:
        raise argparse.ArgumentTypeError("Expected at least one value")
    return values


def _add_shared_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    """Flags accepted both before and after the subcommand.

    Subcommand copies use SUPPRESS defaults so they don't overwrite a value
    given before the subcommand.
    """
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default=default,
        help="Logging level (default: INFO)",
    )
    parser.add_argument(
        "--quiet",
        action="store_true",
        default=argparse.SUPPRESS if suppress else False,
        help="Suppress progress output (keep only results)",
    )
    parser.add_argument(
        "--cache-file",
        default=default,
        help="Basis cache file (default: cache/basis_cache.json)",
    )
    parser.add_argument(
        "--no-cache",
        action="store_true",
        default=argparse.SUPPRESS if suppress else False,
        help="Solve every basis afresh and don't write the basis cache",
    )
    parser.add_argument("--config", default=default, help="JSON configuration file")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    """Training flags; unset flags fall back to the config file or task defaults."""
    run = parser.add_argument_group("run settings")
    run.add_argument("--task", choices=TASKS, help="Task to train on")
    run.add_argument("--model", choices=MODEL_KINDS, help="Model kind")
    run.add_argument(
        "--group",
        help=f"Symmetry group ({', '.join(GROUP_CONSTRUCTORS)}, Trivial(n))",
    )
    run.add_argument("--seed", type=int, help="Random seed (default: 0)")
    run.add_argument("--epochs", type=int, help="Training epochs")
    run.add_argument("--lr", type=float, help="Adam learning rate (default: 3e-3)")
    run.add_argument("--batch-size", type=int, help="Minibatch size")
    run.add_argument(
        "--lr-schedule", choices=LR_SCHEDULES, help="Learning-rate schedule"
    )
    run.add_argument("--n-train", type=int, help="Training examples or chunks")
    run.add_argument("--n-test", type=int, help="Test examples or chunks")

    prior = parser.add_argument_group("prior")
    prior.add_argument(
        "--sigma-a2", type=float, help="Equivariant pathway variance (default: 1e5)"
    )
    prior.add_argument(
        "--sigma-b2", type=float, help="Unconstrained pathway variance (default: 1)"
    )
    prior.add_argument(
        "--prior-weight",
        type=float,
        help="Multiplier on the per-example prior penalty (default: 1)",
    )

    arch = parser.add_argument_group("architecture")
    arch.add_argument("--depth", type=int, help="Hidden layers (default: 3)")
    arch.add_argument("--width", type=int, help="Hidden width (default: 128)")
    arch.add_argument(
        "--channels", type=int, help="Channels per conv layer for rpp-conv"
    )

    tabular = parser.add_argument_group("tabular data")
    tabular.add_argument("--csv", help="CSV file for csv-regression")
    tabular.add_argument("--target", help="Target column (default: y)")
    tabular.add_argument(
        "--no-image",
        action="store_true",
        default=argparse.SUPPRESS,
        help="Keep tabular features flat instead of padding to a square image",
    )

    output = parser.add_argument_group("output")
    output.add_argument("--out", help="Output directory (default: results)")
    output.add_argument(
        "--workers", type=int, help="Worker threads for sweeps (default: 1)"
    )
    output.add_argument(
        "--format",
        nargs="+",
        choices=OUTPUT_FORMATS,
        default=["csv"],
        help="Table formats for sweep results (default: csv)",
    )
    _add_shared_flags(parser, suppress=True)


def build_parser() -> argparse.ArgumentParser:
    """Build the top-level parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Residual pathway prior experiments: equivariant bases, "
        "RPP models and the experiment sweeps around them",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py train --task inertia --model rpp        # One training run
  python main.py experiment --family pendulum --seeds 3  # Regime sweep
  python main.py basis --group "O(3)" --rep-in V --rep-out "V*V"
  python main.py --examples                              # More examples
        """,
    )
    _add_shared_flags(parser, suppress=False)

    # Information and help
    parser.add_argument(
        "--examples", action="store_true", help="Show usage examples and exit"
    )
    parser.add_argument(
        "--cache-help",
        action="store_true",
        help="Show detailed basis cache help and exit",
    )
    parser.add_argument(
        "--cache-stats", action="store_true", help="Show cache statistics and exit"
    )
    parser.add_argument(
        "--clear-cache", action="store_true", help="Clear basis cache and exit"
    )
    parser.add_argument(
        "--version", action="version", version=f"RPP Experiments v{__version__}"
    )

    commands = parser.add_subparsers(dest="command", metavar="COMMAND")

    gen = commands.add_parser(
        "gen-data", help="Generate a task dataset and write it as CSV"
    )
    _add_run_flags(gen)
    gen.add_argument(
        "--side",
        type=int,
        default=4,
        help="Image side for the shifted-pattern dataset (csv-regression)",
    )

    train = commands.add_parser("train", help="Train one model and persist the run")
    _add_run_flags(train)

    experiment = commands.add_parser(
        "experiment", help="MLP/EMLP/RPP across exact, approximate, misspecified"
    )
    _add_run_flags(experiment)
    experiment.add_argument(
        "--family",
        choices=["inertia", "pendulum"],
        default="inertia",
        help="Regime family (default: inertia)",
    )
    experiment.add_argument(
        "--seeds", type=int, default=10, help="Seeds per regime and model"
    )
    experiment.add_argument(
        "--persist", action="store_true", help="Also persist every run directory"
    )

    ablate = commands.add_parser("ablate", help="Sweep the (σ_a², σ_b²) grid")
    _add_run_flags(ablate)
    ablate.add_argument(
        "--sigma-a2-values",
        type=_float_list,
        help="Comma-separated σ_a² values (default: 1e-2,1,1e2,1e4,1e6)",
    )
    ablate.add_argument(
        "--sigma-b2-values",
        type=_float_list,
        help="Comma-separated σ_b² values (default: 1e-2,1,1e2,1e4,1e6)",
    )

    ens = commands.add_parser(
        "ensemble", help="Equivariance error traces of an RPP ensemble"
    )
    _add_run_flags(ens)
    ens.add_argument("--k", type=int, default=10, help="Members per task (default: 10)")
    ens.add_argument(
        "--tasks",
        nargs="+",
        choices=TASKS,
        help="Tasks to train on (default: inertia modified-inertia)",
    )

    basis = commands.add_parser(
        "basis", help="Solve and dump an equivariant basis"
    )
    basis.add_argument("--group", required=True, help="Symmetry group name")
    basis.add_argument("--rep-in", required=True, help='Input rep, e.g. "V+R"')
    basis.add_argument("--rep-out", required=True, help='Output rep, e.g. "V*V"')
    basis.add_argument("--out", help="Output directory (default: results)")
    basis.add_argument("--seed", type=int, help="Seed for the violation check")
    _add_shared_flags(basis, suppress=True)

    catalog = commands.add_parser(
        "catalog", help="State/action reps of the locomotion environments"
    )
    catalog.add_argument("--env", help="Show a single environment")
    catalog.add_argument("--out", help="Also write catalog.csv to this directory")
    _add_shared_flags(catalog, suppress=True)

    ingest = commands.add_parser(
        "ingest", help="Standardize a CSV for csv-regression"
    )
    ingest.add_argument("--csv", required=True, help="Source CSV file")
    ingest.add_argument("--target", default="y", help="Target column (default: y)")
    ingest.add_argument(
        "--no-image",
        action="store_true",
        default=argparse.SUPPRESS,
        help="Keep features flat instead of padding to a square image",
    )
    ingest.add_argument("--seed", type=int, help="Split seed (default: 0)")
    ingest.add_argument("--out", help="Output directory (default: results)")
    _add_shared_flags(ingest, suppress=True)

    return parser


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse and validate command line arguments.

    Args:
        argv: Argument list; None reads ``sys.argv``

    Returns:
        Namespace object containing parsed command line arguments

    Raises:
        SystemExit: If invalid arguments are provided or help is requested
    """
    return build_parser().parse_args(argv)


def show_examples() -> None:
    """Display usage examples for every command."""
    examples = """
🚀 RPP Experiments - Usage Examples

📋 BASIC USAGE:
  python main.py --help                                # Show all commands
  python main.py train --help                          # Flags of one command

🧮 BASIS EXAMPLES:
  python main.py basis --group "SO(2)" --rep-in V --rep-out V    # Rank 2
  python main.py basis --group "O(3)" --rep-in "(R+V)^5" --rep-out "V*V"
  python main.py catalog                               # Locomotion reps
  python main.py catalog --env Hopper                  # One environment

🏋️ TRAINING EXAMPLES:
  python main.py train --task inertia --model rpp      # Exact O(3) symmetry
  python main.py train --task modified-inertia --model emlp
  python main.py train --task windy-pendulum --model rpp --group "O(2)z"
  python main.py train --task inertia --group "SL(3)"  # Misspecified group
  python main.py train --task inertia --epochs 50 --lr-schedule cosine

📊 EXPERIMENT EXAMPLES:
  python main.py experiment --family inertia --seeds 10 --workers 4
  python main.py experiment --family pendulum --format csv json excel
  python main.py ablate --task modified-inertia        # 5x5 prior grid
  python main.py ablate --sigma-a2-values 1,1e4 --sigma-b2-values 1e-2,1
  python main.py ensemble --k 10                       # Equivariance traces

📁 DATA EXAMPLES:
  python main.py gen-data --task pendulum --out data   # Trajectory chunks
  python main.py gen-data --task csv-regression --side 4 --out data
  python main.py ingest --csv data.csv --target y --out data
  python main.py train --task csv-regression --model rpp-conv --csv data.csv

🔧 DEBUGGING EXAMPLES:
  python main.py --log-level DEBUG train --epochs 2    # Detailed logging
  python main.py --quiet experiment --seeds 1          # Minimal output
  python main.py train --config run.json --seed 3      # Config file + overrides

💡 RESULTS:
  Every training run writes results/runs/<timestamp>-<hash>/ with
  config.json, metrics.csv, timing.csv, summary.json and a checkpoint.

For more help: python main.py --help
For caching help: python main.py --cache-help
    """
    print(examples)


def show_cache_help() -> None:
    """Display how the persistent basis cache works."""
    cache_help = """
🔄 RPP Experiments - Basis Cache

💡 HOW IT WORKS:
Solving equivariance constraints is the slowest part of building a model.
Each (group, input block, output block) basis is solved once and kept in
memory; with the cache enabled it is also written to disk so later runs
load it instead of solving again.

📁 CACHE FILE:
• Default: cache/basis_cache.json
• Contains: one orthonormal block basis per key, plus a version stamp
• Keys include the group, both reps and the solver tolerance
• Version mismatches and corrupted files are ignored, never trusted

⚙️  CACHE COMMANDS:
  python main.py --cache-stats                 # Show cache status, age, size
  python main.py --clear-cache                 # Delete cache file
  python main.py --no-cache train              # Solve every basis afresh
  python main.py --cache-file my_cache.json train

🔧 TROUBLESHOOTING:
• Cache corrupted? Use --clear-cache
• Changed a group definition? Use --clear-cache
• Permission errors? Check write access to the cache directory

For examples: python main.py --examples
For all options: python main.py --help
    """
    print(cache_help)
