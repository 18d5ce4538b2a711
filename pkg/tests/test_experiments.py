"""Tests for the regime, prior-grid and ensemble sweeps."""

import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))
from rpp_experiments.core.config import ExperimentConfig
from rpp_experiments.core.errors import ConfigError
from rpp_experiments.training.experiments import (
    ENSEMBLE_TASKS,
    REGIMES,
    Job,
    derive_seeds,
    ensemble,
    final_equivariance,
    prior_grid,
    prior_grid_surface,
    regime_jobs,
    regime_summary,
    run_jobs,
    run_regimes,
)


def tiny_base(**changes):
    base = ExperimentConfig(
        task="inertia",
        epochs=1,
        n_train=8,
        n_test=4,
        depth=1,
        width=15,
        eval_group_samples=1,
    )
    return base.replace(**changes)


class TestJobs:
    def test_derived_seeds(self):
        seeds = derive_seeds(0, 5)
        assert len(set(seeds)) == 5
        assert seeds == derive_seeds(0, 5)
        assert seeds != derive_seeds(1, 5)

    def test_duplicate_keys_rejected(self):
        jobs = [Job(("a",), tiny_base()), Job(("a",), tiny_base())]
        with pytest.raises(ConfigError, match="unique"):
            run_jobs(jobs)

    def test_failed_job_is_reported_not_raised(self):
        bad = tiny_base(task="csv-regression", model="mlp", csv_path="absent.csv")
        outcomes = run_jobs([Job(("bad",), bad), Job(("good",), tiny_base())])
        by_key = {o.key: o for o in outcomes}
        assert by_key[("bad",)].status == "failed"
        assert "absent.csv" in by_key[("bad",)].row()["error"]
        assert by_key[("good",)].status == "completed"

    def test_regime_jobs_cover_every_model(self):
        jobs = regime_jobs(tiny_base(), "pendulum", [0, 1])
        assert len(jobs) == 18
        groups = {job.config.task: job.config.group for job in jobs}
        assert groups["windy-pendulum"] == "O(2)z"
        with pytest.raises(ConfigError, match="Unknown regime family"):
            regime_jobs(tiny_base(), "swimmer", [0])

    def test_regime_table(self):
        assert [r[0] for r in REGIMES["inertia"]] == [
            "exact",
            "approximate",
            "misspecified",
        ]
        assert REGIMES["inertia"][2][2] == "SL(3)"


class TestRegimes:
    def test_one_row_per_seed_and_model(self):
        frame = run_regimes(tiny_base(), "inertia", seeds=[0])
        assert len(frame) == 9
        assert (frame.groupby("regime").size() == 3).all()
        assert set(frame["model"]) == {"mlp", "emlp", "rpp"}
        summary = regime_summary(frame)
        completed = frame[frame["status"] == "completed"]
        assert summary["runs"].sum() == len(completed)
        present = set(summary["regime"])
        order = [r for r in ("exact", "approximate", "misspecified") if r in present]
        assert list(summary["regime"].drop_duplicates()) == order


class TestPriorGrid:
    def test_grid_rows_and_surface(self):
        values = (1e-2, 1.0, 1e2, 1e4)
        frame = prior_grid(tiny_base(task="modified-inertia"), values, values)
        assert len(frame) == 16
        assert set(frame["model"]) == {"rpp"}
        surface = prior_grid_surface(frame)
        assert surface.shape == (4, 4)
        assert list(surface.index) == list(values)

    def test_workers_do_not_change_results(self):
        values = (1.0, 1e4)
        serial = prior_grid(tiny_base(), values, values)
        parallel = prior_grid(tiny_base(workers=2), values, values)
        pd.testing.assert_frame_equal(serial, parallel)

    def test_grid_order_does_not_change_results(self):
        values = (1e-2, 1.0, 1e4)
        forward = prior_grid(tiny_base(), values, values)
        backward = prior_grid(tiny_base(), values[::-1], values[::-1])
        pd.testing.assert_frame_equal(forward, backward)
        pd.testing.assert_frame_equal(
            prior_grid_surface(forward), prior_grid_surface(backward)
        )


class TestEnsemble:
    def test_traces_per_member(self):
        traces = ensemble(tiny_base(), k=3)
        assert set(traces["task"]) == set(ENSEMBLE_TASKS)
        assert traces.groupby("task")["member"].nunique().tolist() == [3, 3]
        # epoch 0 and epoch 1 per member
        assert len(traces) == 2 * 3 * 2
        final = final_equivariance(traces)
        assert final["members"].tolist() == [3, 3]

    def test_members_share_data_but_not_init(self):
        traces = ensemble(tiny_base(), k=2, tasks=("inertia",))
        start = traces[traces["epoch"] == 0]
        assert start["seed"].nunique() == 2
        assert not np.isclose(*start["test_mse"].to_numpy())

    def test_empty_ensemble_rejected(self):
        with pytest.raises(ConfigError):
            ensemble(tiny_base(), k=0)
