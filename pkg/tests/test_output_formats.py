"""Tests for output format generation (CSV, JSON, Excel)."""

import json
import shutil
import sys
import tempfile
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))
from rpp_experiments.core.errors import OutputPermissionError
from rpp_experiments.output.csv_output import create_experiment_csvs, write_table_csv
from rpp_experiments.output.excel_output import create_excel_output
from rpp_experiments.output.json_output import create_json_output
from rpp_experiments.training.experiments import prior_grid_surface


class TestOutputFormats:
    """Test cases for experiment table output."""

    def setup_method(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()
        self.runs = pd.DataFrame(
            {
                "family": ["inertia"] * 3,
                "regime": ["exact", "exact", "approximate"],
                "model": ["mlp", "rpp", "rpp"],
                "seed": [0, 0, 0],
                "status": ["completed", "completed", "diverged"],
                "test_mse": [0.5, 0.01, np.nan],
                "error": ["", "", "Objective 1e+09 exceeded 1e+08 at epoch 4"],
            }
        )
        grid = pd.DataFrame(
            {
                "sigma_a2": [1.0, 1.0, 1e4, 1e4],
                "sigma_b2": [1.0, 1e4, 1.0, 1e4],
                "test_mse": [0.3, 0.4, 0.1, 0.2],
            }
        )
        self.tables = {
            "inertia_runs": self.runs,
            "prior_grid_surface": prior_grid_surface(grid),
        }
        self.metadata = {"task": "inertia", "epochs": 10, "seeds": [0, 1]}

    def teardown_method(self):
        """Clean up test fixtures."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_write_table_csv(self, capsys):
        path = write_table_csv(self.runs, self.temp_dir, "inertia_runs")
        assert path == Path(self.temp_dir) / "inertia_runs.csv"
        out = capsys.readouterr().out
        assert "📝 Creating inertia_runs.csv" in out
        assert "✓ Created inertia_runs.csv (3 rows)" in out

        loaded = pd.read_csv(path)
        assert list(loaded.columns) == list(self.runs.columns)
        assert loaded["test_mse"].isna().tolist() == [False, False, True]

    def test_surface_keeps_index(self):
        paths = create_experiment_csvs(self.tables, self.temp_dir, quiet=True)
        assert set(paths) == {"inertia_runs", "prior_grid_surface"}
        surface = pd.read_csv(paths["prior_grid_surface"], index_col=0)
        assert surface.shape == (2, 2)
        assert surface.iloc[1].tolist() == [0.1, 0.2]

    def test_csv_write_error(self):
        blocker = Path(self.temp_dir) / "blocker"
        blocker.write_text("")
        with pytest.raises(OutputPermissionError):
            write_table_csv(self.runs, str(blocker), "runs", quiet=True)

    def test_create_json_output(self):
        result = create_json_output(
            self.tables, self.temp_dir, "inertia_regimes", self.metadata, quiet=True
        )
        assert result is True
        with open(Path(self.temp_dir) / "inertia_regimes.json") as f:
            data = json.load(f)

        assert data["generator"].startswith("RPP Experiments v")
        assert data["metadata"]["seeds"] == [0, 1]
        runs = data["tables"]["inertia_runs"]
        assert len(runs) == 3
        assert runs[2]["test_mse"] is None
        surface = data["tables"]["prior_grid_surface"]
        assert surface[0]["sigma_a2"] == 1.0
        assert surface[0]["1.0"] == 0.3

    def test_json_does_not_mutate_tables(self):
        before = self.tables["prior_grid_surface"].copy()
        create_json_output(self.tables, self.temp_dir, "grid", quiet=True)
        pd.testing.assert_frame_equal(self.tables["prior_grid_surface"], before)

    def test_json_write_failure(self):
        with patch("builtins.open", side_effect=PermissionError("denied")):
            result = create_json_output(self.tables, self.temp_dir, "x", quiet=True)
        assert result is False

    def test_empty_tables(self):
        result = create_json_output({}, self.temp_dir, "empty", quiet=True)
        assert result is True
        data = json.loads((Path(self.temp_dir) / "empty.json").read_text())
        assert data["tables"] == {}

    def test_create_excel_output_success(self):
        pytest.importorskip("openpyxl")
        from openpyxl import load_workbook

        result = create_excel_output(
            self.tables, self.temp_dir, "inertia_regimes", self.metadata, quiet=True
        )
        assert result is True
        wb = load_workbook(Path(self.temp_dir) / "inertia_regimes.xlsx")
        assert wb.sheetnames == ["Inertia Runs", "Prior Grid Surface", "Statistics"]
        runs = wb["Inertia Runs"]
        assert runs["A1"].value == "family"
        assert runs["A1"].font.bold
        # NaN cells are written empty
        assert runs["F4"].value in ("", None)
        stats = [row[0].value for row in wb["Statistics"].iter_rows()]
        assert "Run Settings" in stats
        assert "epochs" in stats

    def test_create_excel_output_missing_dependencies(self):
        real_import = __import__

        def fake_import(name, *args, **kwargs):
            if name == "openpyxl" or name.startswith("openpyxl."):
                raise ImportError("openpyxl not available")
            return real_import(name, *args, **kwargs)

        with patch("builtins.__import__", side_effect=fake_import):
            result = create_excel_output(self.tables, self.temp_dir, "x", quiet=True)
        assert result is False
