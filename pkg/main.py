#!/usr/bin/env python3
"""RPP Experiments - Main application entry point.

Dispatches the subcommands (dataset generation, single training runs, the
regime/ablation/ensemble sweeps, basis dumps, the locomotion catalog and CSV
ingestion) and writes their results through the output writers.
"""

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from rpp_experiments.core.cache import BasisCache
from rpp_experiments.core.config import (
    ExperimentConfig,
    create_config_from_args,
    setup_logging,
)
from rpp_experiments.core.errors import (
    ConfigError,
    RPPError,
    UnknownEnvironmentError,
)
from rpp_experiments.core.progress import ProgressTracker
from rpp_experiments.data.export import write_dataset_files
from rpp_experiments.data.tabular import (
    generate_shifted_patterns,
    ingest_csv_regression,
    write_tabular_dataset,
)
from rpp_experiments.output.csv_output import create_experiment_csvs, write_table_csv
from rpp_experiments.output.excel_output import create_excel_output
from rpp_experiments.output.json_output import create_json_output
from rpp_experiments.symmetry.basis import equivariant_basis, max_constraint_violation
from rpp_experiments.symmetry.catalog import CATALOG, catalog_report
from rpp_experiments.symmetry.groups import get_group
from rpp_experiments.symmetry.reps import parse_rep, rep_text
from rpp_experiments.training.experiments import (
    DEFAULT_GRID,
    ENSEMBLE_TASKS,
    ensemble,
    final_equivariance,
    prior_grid,
    prior_grid_surface,
    regime_summary,
    run_regimes,
)
from rpp_experiments.training.runs import ensure_writable, persist_run
from rpp_experiments.training.trainer import Trainer
from rpp_experiments.utils.cli import parse_arguments, show_cache_help, show_examples

Outputs = List[str]


def write_tables(
    tables: Dict[str, pd.DataFrame],
    config: ExperimentConfig,
    name: str,
    formats: List[str],
    quiet: bool,
) -> Outputs:
    """Write sweep tables in every requested format."""
    metadata = {"experiment": name, **config.to_dict()}
    written = []
    if "csv" in formats:
        create_experiment_csvs(tables, config.output_dir, quiet)
        written.append(f"CSV ({len(tables)} tables)")
    if "json" in formats and create_json_output(
        tables, config.output_dir, name, metadata, quiet
    ):
        written.append("JSON")
    if "excel" in formats and create_excel_output(
        tables, config.output_dir, name, metadata, quiet
    ):
        written.append("Excel")
    return written


def cmd_gen_data(
    args: argparse.Namespace,
    config: ExperimentConfig,
    cache: Optional[BasisCache],
    progress: ProgressTracker,
) -> Outputs:
    quiet = progress.quiet
    if config.task == "csv-regression":
        n = config.n_train or 1000
        rng = np.random.default_rng(config.seed)
        frame = generate_shifted_patterns(n, args.side, rng)
        path = write_table_csv(frame, config.output_dir, "shifted_patterns", quiet)
        return [str(path)]

    trainer = Trainer(config, cache=cache)
    data = trainer.load_data()
    frames = trainer.task.dataset_frames(data)
    metadata = dict(data.metadata)
    metadata["seed"] = trainer.config.seed
    paths = write_dataset_files(
        frames, metadata, trainer.config.output_dir, trainer.config.task, quiet
    )
    return [str(p) for p in paths.values()]


def cmd_train(
    args: argparse.Namespace,
    config: ExperimentConfig,
    cache: Optional[BasisCache],
    progress: ProgressTracker,
) -> Outputs:
    ensure_writable(config.output_dir)
    result = Trainer(config, cache=cache, progress=progress).run()
    run_dir = persist_run(result)
    summary = result.summary()
    progress.print_table(
        [[key, value] for key, value in summary.items()],
        ["Field", "Value"],
        title="Run Summary",
    )
    if not result.succeeded:
        progress.print_status(f"⚠️  Run {result.status}: {result.error}", "yellow")
    return [str(run_dir)]


def cmd_experiment(
    args: argparse.Namespace,
    config: ExperimentConfig,
    cache: Optional[BasisCache],
    progress: ProgressTracker,
) -> Outputs:
    ensure_writable(config.output_dir)
    if args.seeds < 1:
        raise ConfigError(f"--seeds must be >= 1, got {args.seeds}")
    seeds = [config.seed + i for i in range(args.seeds)]
    runs = run_regimes(config, args.family, seeds, cache, progress, args.persist)
    summary = regime_summary(runs)
    progress.print_table(
        summary.values.tolist(), list(summary.columns), title="Test MSE Quartiles"
    )
    tables = {f"{args.family}_runs": runs, f"{args.family}_summary": summary}
    name = f"{args.family}_regimes"
    return write_tables(tables, config, name, args.format, progress.quiet)


def cmd_ablate(
    args: argparse.Namespace,
    config: ExperimentConfig,
    cache: Optional[BasisCache],
    progress: ProgressTracker,
) -> Outputs:
    ensure_writable(config.output_dir)
    if args.task is None and not args.config:
        config = config.replace(task="modified-inertia")
    a2_values = args.sigma_a2_values or list(DEFAULT_GRID)
    b2_values = args.sigma_b2_values or list(DEFAULT_GRID)
    grid = prior_grid(config, a2_values, b2_values, cache, progress)
    surface = prior_grid_surface(grid)
    progress.print_table(
        [[a2, *row] for a2, row in zip(surface.index, surface.values.tolist())],
        ["σ_a² \\ σ_b²", *[f"{b2:g}" for b2 in surface.columns]],
        title=f"Test MSE on {config.task}",
    )
    tables = {"prior_grid": grid, "prior_grid_surface": surface}
    return write_tables(tables, config, "prior_grid", args.format, progress.quiet)


def cmd_ensemble(
    args: argparse.Namespace,
    config: ExperimentConfig,
    cache: Optional[BasisCache],
    progress: ProgressTracker,
) -> Outputs:
    ensure_writable(config.output_dir)
    tasks = args.tasks or list(ENSEMBLE_TASKS)
    traces = ensemble(config, args.k, tasks, cache, progress)
    final = final_equivariance(traces)
    progress.print_table(
        final.values.tolist(), list(final.columns), title="Final Equivariance Error"
    )
    tables = {"ensemble_traces": traces, "ensemble_final": final}
    return write_tables(tables, config, "ensemble", args.format, progress.quiet)


def cmd_basis(
    args: argparse.Namespace,
    config: ExperimentConfig,
    cache: Optional[BasisCache],
    progress: ProgressTracker,
) -> Outputs:
    group = get_group(args.group)
    rep_in = parse_rep(args.rep_in, group.base_dim)
    rep_out = parse_rep(args.rep_out, group.base_dim)
    basis = equivariant_basis(group, rep_in, rep_out, cache)
    violation = max_constraint_violation(
        basis, group, rep_in, rep_out, np.random.default_rng(config.seed)
    )

    out = Path(args.out) if args.out else Path(config.output_dir) / "basis.csv"
    if out.suffix != ".csv":
        out = out / "basis.csv"
    ensure_writable(str(out.parent))
    columns = [f"q{k}" for k in range(basis.rank)]
    pd.DataFrame(basis.dense(), columns=columns).to_csv(
        out, index=False, float_format="%.17g"
    )
    header = {
        "group": group.name,
        "rep_in": rep_text(rep_in),
        "rep_out": rep_text(rep_out),
        "n_in": basis.n_in,
        "n_out": basis.n_out,
        "r": basis.rank,
        "tolerance": basis.tolerance,
        "max_constraint_violation": violation,
    }
    header_path = out.with_suffix(".json")
    header_path.write_text(json.dumps(header, indent=2), encoding="utf-8")
    progress.print_table(
        [[key, value] for key, value in header.items()],
        ["Field", "Value"],
        title="Equivariant Basis",
    )
    return [str(out), str(header_path)]


def cmd_catalog(
    args: argparse.Namespace,
    config: ExperimentConfig,
    cache: Optional[BasisCache],
    progress: ProgressTracker,
) -> Outputs:
    rows = catalog_report()
    if args.env:
        if args.env not in CATALOG:
            raise UnknownEnvironmentError(
                f"Unknown environment '{args.env}' (known: {', '.join(CATALOG)})"
            )
        rows = [row for row in rows if row["environment"] == args.env]
    frame = pd.DataFrame(rows)
    shown = ["environment", "group", "state_dim", "action_dim", "flagged", "note"]
    progress.print_table(
        frame[shown].values.tolist(), shown, title="Locomotion Representations"
    )
    if args.out:
        return [str(write_table_csv(frame, args.out, "catalog", progress.quiet))]
    return ["console table"]


def cmd_ingest(
    args: argparse.Namespace,
    config: ExperimentConfig,
    cache: Optional[BasisCache],
    progress: ProgressTracker,
) -> Outputs:
    dataset = ingest_csv_regression(
        args.csv, args.target, config.image_reshape, config.seed
    )
    out_dir = ensure_writable(config.output_dir)
    target = out_dir / f"{Path(args.csv).stem}_processed.csv"
    path = write_tabular_dataset(dataset, str(target))
    progress.print_status(
        f"✓ {dataset.n_features} features, {len(dataset.y_train)} train / "
        f"{len(dataset.y_test)} test rows"
        + (f", image {dataset.image_shape}" if dataset.image_shape else ""),
        "green",
    )
    return [str(path), str(path.with_suffix(".json"))]


COMMAND_HANDLERS: Dict[str, Callable[..., Outputs]] = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "experiment": cmd_experiment,
    "ablate": cmd_ablate,
    "ensemble": cmd_ensemble,
    "basis": cmd_basis,
    "catalog": cmd_catalog,
    "ingest": cmd_ingest,
}


def show_cache_stats(cache: BasisCache, progress: ProgressTracker) -> None:
    stats: Dict[str, Any] = cache.get_stats()
    progress.print_panel(
        f"""Cache Statistics:
• File: {cache.cache_file}
• Exists: {'✓' if stats.get('exists') else '✗'}
• Valid: {'✓' if stats.get('valid') else '✗'}
• Age: {stats.get('age_hours', 0):.1f} hours
• Size: {stats.get('file_size', 0):,} bytes
• Basis blocks: {stats.get('cache_info', {}).get('total_entries', 'N/A')}
• Version: {stats.get('cache_info', {}).get('version', 'N/A')}""",
        "🔄 Cache Information",
    )


def main() -> None:
    """Main entry point for RPP Experiments.

    Workflow:
        1. Parse command-line arguments and create configuration
        2. Setup logging, progress tracking and the basis cache
        3. Handle special commands (help, cache operations)
        4. Run the selected subcommand
        5. Save the basis cache and display the completion summary

    Raises:
        SystemExit: For help commands, missing subcommands or library errors
    """
    args = parse_arguments()

    if args.examples:
        show_examples()
        return
    if args.cache_help:
        show_cache_help()
        return

    try:
        config = create_config_from_args(args)
    except RPPError as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        sys.exit(2)

    logger = setup_logging(config.log_level)
    progress = ProgressTracker(quiet=args.quiet)
    cache = BasisCache(config.cache_file) if config.cache_enabled else None

    if args.cache_stats:
        show_cache_stats(cache or BasisCache(config.cache_file), progress)
        return

    if args.clear_cache:
        if BasisCache(config.cache_file).clear():
            progress.print_status("✅ Cache cleared successfully", "green")
        else:
            progress.print_status("❌ Failed to clear cache", "red")
        return

    if not args.command:
        progress.print_status(
            "No command given. Use --help for commands or --examples for usage.",
            "yellow",
        )
        sys.exit(2)

    start_time = time.time()
    try:
        outputs = COMMAND_HANDLERS[args.command](args, config, cache, progress)
        if cache is not None and cache.save():
            logger.debug(f"Basis cache: {cache.hits} hits, {cache.misses} misses")

        total_time = time.time() - start_time
        if not args.quiet:
            outputs_text = "\n".join(f"• {o}" for o in outputs) or "• none"
            cache_line = (
                f"{cache.hits} hits / {cache.misses} misses" if cache else "disabled"
            )
            progress.print_panel(
                f"""✅ {args.command} complete!

📁 Generated Outputs:
{outputs_text}

⏱️  Performance:
• Total Time: {total_time:.1f} seconds
• Basis Cache: {cache_line}

💡 Next Steps:
• View generated files in: {config.output_dir}
• Use --cache-stats to monitor cache health""",
                "🚀 RPP Experiments",
            )
        logger.info(f"{args.command} completed in {total_time:.1f} seconds")

    except KeyboardInterrupt:
        progress.print_status("\n⚠️  Operation interrupted by user", "yellow")
        logger.info("Operation interrupted by user")
        sys.exit(130)
    except RPPError as e:
        progress.print_status(f"❌ Error: {e}", "red")
        logger.error(f"Application error: {e}", exc_info=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
