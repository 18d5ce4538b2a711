"""Tests for CSV ingestion, image padding and the shifted-pattern generator."""

import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))
from rpp_experiments.core.errors import DataFormatError
from rpp_experiments.data.tabular import (
    generate_shifted_patterns,
    image_side_for,
    ingest_csv_regression,
    pad_to_square,
    read_tabular_dataset,
    split_indices,
    write_tabular_dataset,
)


class TestImagePadding:
    @pytest.mark.parametrize(
        "n_features, side", [(1, 1), (4, 2), (5, 3), (9, 3), (13, 4), (16, 4)]
    )
    def test_side(self, n_features, side):
        assert image_side_for(n_features) == side

    def test_padding_keeps_features_first(self):
        X = np.arange(26.0).reshape(2, 13)
        padded = pad_to_square(X, 4)
        assert padded.shape == (2, 16)
        np.testing.assert_array_equal(padded[:, :13], X)
        assert not padded[:, 13:].any()


class TestIngestCsv:
    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()
        self.rng = np.random.default_rng(0)

    def teardown_method(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def write_csv(self, frame, name="data.csv"):
        path = Path(self.temp_dir) / name
        frame.to_csv(path, index=False)
        return str(path)

    def housing_like(self, n=50):
        frame = pd.DataFrame(
            self.rng.standard_normal((n, 13)) * 5 + 3,
            columns=[f"c{i}" for i in range(13)],
        )
        frame["price"] = self.rng.standard_normal(n)
        return frame

    def test_thirteen_features_become_four_by_four(self):
        data = ingest_csv_regression(self.write_csv(self.housing_like()), "price")
        assert data.image_shape == (4, 4)
        assert data.X_train.shape == (40, 16)
        assert data.X_test.shape == (10, 16)
        assert data.y_train.shape == (40, 1)
        assert data.n_features == 13

    def test_standardized_on_training_split(self):
        data = ingest_csv_regression(
            self.write_csv(self.housing_like()), "price", image_reshape=False
        )
        assert data.image_side is None
        np.testing.assert_allclose(data.X_train.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(data.X_train.std(axis=0), 1.0, atol=1e-12)

    def test_constant_column_keeps_unit_scale(self):
        frame = self.housing_like()
        frame["c0"] = 7.0
        data = ingest_csv_regression(self.write_csv(frame), "price")
        assert data.std[0] == 1.0
        assert not data.X_train[:, 0].any()

    def test_split_is_seeded(self):
        a = split_indices(30, seed=4)
        b = split_indices(30, seed=4)
        c = split_indices(30, seed=5)
        np.testing.assert_array_equal(a[1], b[1])
        assert not np.array_equal(a[1], c[1])
        assert len(a[1]) == 6

    def test_missing_target(self):
        path = self.write_csv(self.housing_like())
        with pytest.raises(DataFormatError, match="'value' not found"):
            ingest_csv_regression(path, "value")

    def test_non_numeric_cell_is_located(self):
        frame = self.housing_like().astype(object)
        frame.loc[3, "c5"] = "abc"
        with pytest.raises(DataFormatError, match="column 'c5' \\(row 4\\)"):
            ingest_csv_regression(self.write_csv(frame), "price")

    def test_missing_values_rejected(self):
        frame = self.housing_like()
        frame.loc[0, "c1"] = np.nan
        with pytest.raises(DataFormatError, match="missing values"):
            ingest_csv_regression(self.write_csv(frame), "price")

    def test_unreadable_file(self):
        with pytest.raises(DataFormatError, match="Could not read"):
            ingest_csv_regression(str(Path(self.temp_dir) / "absent.csv"), "y")

    def test_target_only(self):
        path = self.write_csv(pd.DataFrame({"y": [1.0, 2.0, 3.0]}))
        with pytest.raises(DataFormatError, match="no feature columns"):
            ingest_csv_regression(path, "y")

    def test_write_and_read_back(self):
        data = ingest_csv_regression(self.write_csv(self.housing_like()), "price")
        out = write_tabular_dataset(data, str(Path(self.temp_dir) / "out" / "p.csv"))
        assert out.with_suffix(".json").exists()
        loaded = read_tabular_dataset(str(out))
        np.testing.assert_array_equal(loaded.X_test, data.X_test)
        np.testing.assert_array_equal(loaded.y_train, data.y_train)
        assert loaded.image_side == 4
        assert loaded.feature_names == data.feature_names

    def test_read_without_sidecar(self):
        path = self.write_csv(self.housing_like(), "orphan.csv")
        with pytest.raises(DataFormatError, match="sidecar"):
            read_tabular_dataset(path)


class TestShiftedPatterns:
    def test_layout_and_labels(self):
        frame = generate_shifted_patterns(40, 5, np.random.default_rng(1))
        assert frame.shape == (40, 26)
        assert frame.columns[-1] == "y"
        assert set(frame["y"].unique()) <= {-1.0, 1.0}

    def test_noise_free_stamp_is_recoverable(self):
        frame = generate_shifted_patterns(10, 4, np.random.default_rng(2), noise=0.0)
        images = frame.drop(columns="y").to_numpy().reshape(10, 4, 4)
        # both stamps have five lit pixels
        np.testing.assert_array_equal(images.sum(axis=(1, 2)), np.full(10, 5.0))

    def test_side_too_small(self):
        with pytest.raises(DataFormatError):
            generate_shifted_patterns(5, 2, np.random.default_rng(3))
