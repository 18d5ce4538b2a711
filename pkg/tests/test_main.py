"""End-to-end tests of the command-line entry point and console output."""

import json
import logging
import shutil
import sys
import tempfile
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))
import main
from rpp_experiments.core.progress import ProgressTracker


def run_main(*argv):
    """Run main() with the given arguments and no log file."""
    quiet_logger = logging.getLogger("test_main")
    with patch("sys.argv", ["main.py", *argv]), patch.object(
        main, "setup_logging", return_value=quiet_logger
    ):
        main.main()


class TestCommands:
    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()
        self.cache_file = str(Path(self.temp_dir) / "cache" / "basis.json")

    def teardown_method(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_basis_dump(self):
        out = Path(self.temp_dir) / "basis.csv"
        run_main(
            "--quiet",
            "--cache-file",
            self.cache_file,
            "basis",
            "--group",
            "SO(2)",
            "--rep-in",
            "V",
            "--rep-out",
            "V",
            "--out",
            str(out),
        )
        Q = pd.read_csv(out).to_numpy()
        assert Q.shape == (4, 2)
        np.testing.assert_allclose(Q.T @ Q, np.eye(2), atol=1e-10)
        header = json.loads(out.with_suffix(".json").read_text())
        assert header["r"] == 2
        assert header["max_constraint_violation"] < 1e-6
        assert Path(self.cache_file).exists()

    def test_catalog_csv(self):
        run_main("--quiet", "--no-cache", "catalog", "--out", self.temp_dir)
        frame = pd.read_csv(Path(self.temp_dir) / "catalog.csv")
        hopper = frame[frame["environment"] == "Hopper"].iloc[0]
        assert (hopper["state_dim"], hopper["action_dim"]) == (11, 3)

    def test_unknown_environment_exits(self):
        with pytest.raises(SystemExit) as excinfo:
            run_main("--quiet", "--no-cache", "catalog", "--env", "Ant")
        assert excinfo.value.code == 1

    def test_missing_command_exits(self):
        with pytest.raises(SystemExit) as excinfo:
            run_main("--quiet", "--no-cache")
        assert excinfo.value.code == 2

    def test_bad_config_file_exits(self):
        bad = Path(self.temp_dir) / "bad.json"
        bad.write_text('{"colour": 1}')
        with pytest.raises(SystemExit) as excinfo:
            run_main("train", "--config", str(bad))
        assert excinfo.value.code == 2

    def test_train_persists_run(self):
        run_main(
            "--quiet",
            "--no-cache",
            "train",
            "--task",
            "inertia",
            "--model",
            "mlp",
            "--epochs",
            "1",
            "--n-train",
            "8",
            "--n-test",
            "4",
            "--depth",
            "1",
            "--width",
            "8",
            "--out",
            self.temp_dir,
        )
        runs = list((Path(self.temp_dir) / "runs").iterdir())
        assert len(runs) == 1
        assert (runs[0] / "metrics.csv").exists()

    def test_gen_data_inertia(self):
        run_main(
            "--quiet",
            "--no-cache",
            "gen-data",
            "--task",
            "modified-inertia",
            "--n-train",
            "5",
            "--n-test",
            "3",
            "--out",
            self.temp_dir,
        )
        train = pd.read_csv(Path(self.temp_dir) / "modified-inertia_train.csv")
        assert train.shape == (5, 29)
        meta = json.loads(
            (Path(self.temp_dir) / "modified-inertia_metadata.json").read_text()
        )
        assert meta["modified"] is True
        assert meta["counts"] == {"train": 5, "test": 3}

    def test_gen_data_patterns_then_ingest(self):
        run_main(
            "--quiet",
            "--no-cache",
            "gen-data",
            "--task",
            "csv-regression",
            "--csv",
            "unused.csv",
            "--n-train",
            "20",
            "--side",
            "4",
            "--out",
            self.temp_dir,
        )
        source = Path(self.temp_dir) / "shifted_patterns.csv"
        assert len(pd.read_csv(source)) == 20
        run_main("--quiet", "ingest", "--csv", str(source), "--out", self.temp_dir)
        processed = Path(self.temp_dir) / "shifted_patterns_processed.csv"
        sidecar = json.loads(processed.with_suffix(".json").read_text())
        assert sidecar["image_side"] == 4

    def test_clear_cache(self):
        Path(self.cache_file).parent.mkdir(parents=True)
        Path(self.cache_file).write_text("{}")
        run_main("--quiet", "--cache-file", self.cache_file, "--clear-cache")
        assert not Path(self.cache_file).exists()


class TestProgressTracker:
    def test_plain_table(self, capsys):
        tracker = ProgressTracker(use_rich=False)
        tracker.print_table([["rpp", 0.0123456]], ["model", "mse"], title="Runs")
        out = capsys.readouterr().out
        assert "Runs" in out
        assert "0.01235" in out

    def test_quiet_prints_nothing(self, capsys):
        tracker = ProgressTracker(quiet=True)
        with tracker.operation("Training", 3) as bar:
            bar.advance(loss=1.0)
        tracker.print_status("hello")
        tracker.print_panel("body", "title")
        assert capsys.readouterr().out == ""

    def test_plain_operation(self, capsys):
        tracker = ProgressTracker(use_rich=False)
        with tracker.operation("Prior grid", 4) as bar:
            bar.advance(status="completed")
        assert "Prior grid (4 steps)" in capsys.readouterr().out
