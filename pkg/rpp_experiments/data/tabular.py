"""Tabular regression data for the convolutional RPP model.

Numeric CSVs are standardized on the training split and, optionally,
zero-padded to the smallest square image so the features can be fed to the
Toeplitz convolution layers. Also bundles the synthetic shifted-pattern
task, where the label depends on which of two 3×3 stamps appears somewhere
in the image.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..core.errors import DataFormatError

TEST_FRACTION = 0.2
FORMAT_VERSION = "tabular-1"

logger = logging.getLogger(__name__)


@dataclass
class TabularDataset:
    """A processed regression dataset.

    Attributes:
        X_train: Standardized (and possibly padded) training features
        y_train: Training targets, shape (n, 1)
        X_test: Test features processed with the training statistics
        y_test: Test targets, shape (n, 1)
        feature_names: Original feature columns in order
        target: Target column name
        image_side: Side h of the padded h×h image, or None without reshaping
        mean: Per-feature training mean
        std: Per-feature training standard deviation (1 where constant)
    """

    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    feature_names: List[str]
    target: str
    image_side: Optional[int] = None
    mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    std: np.ndarray = field(default_factory=lambda: np.zeros(0))
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def image_shape(self) -> Optional[Tuple[int, int]]:
        if self.image_side is None:
            return None
        return (self.image_side, self.image_side)


def image_side_for(n_features: int) -> int:
    """Smallest h with h² >= n_features."""
    return math.isqrt(max(n_features, 1) - 1) + 1


def pad_to_square(X: np.ndarray, side: int) -> np.ndarray:
    padded = np.zeros((X.shape[0], side * side))
    padded[:, : X.shape[1]] = X
    return padded


def _numeric_frame(frame: pd.DataFrame, source: str) -> pd.DataFrame:
    converted = frame.apply(pd.to_numeric, errors="coerce")
    bad = converted.isna() & frame.notna()
    if bad.any().any():
        column = bad.any()[bad.any()].index[0]
        row = int(bad[column].to_numpy().nonzero()[0][0])
        raise DataFormatError(
            f"{source}: non-numeric value {frame[column].iloc[row]!r} in column "
            f"'{column}' (row {row + 1})"
        )
    if converted.isna().any().any():
        raise DataFormatError(f"{source}: missing values are not supported")
    return converted.astype(np.float64)


def split_indices(n: int, seed: int, test_fraction: float = TEST_FRACTION):
    """Seeded shuffle split into (train, test) row indices."""
    order = np.random.default_rng(seed).permutation(n)
    n_test = int(round(n * test_fraction))
    return np.sort(order[n_test:]), np.sort(order[:n_test])


def ingest_csv_regression(
    path: str, target: str, image_reshape: bool = True, seed: int = 0
) -> TabularDataset:
    """Load a numeric CSV as a standardized regression dataset.

    Args:
        path: CSV file with a header row
        target: Name of the target column
        image_reshape: Zero-pad features to the smallest square image
        seed: Seed of the 80/20 train/test shuffle

    Returns:
        TabularDataset with features standardized on the training split

    Raises:
        DataFormatError: If the file is unreadable, the target column is
            missing or a cell is not numeric
    """
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataFormatError(f"Could not read CSV {path}: {e}") from e
    if target not in frame.columns:
        raise DataFormatError(
            f"{path}: target column '{target}' not found "
            f"(columns: {', '.join(map(str, frame.columns))})"
        )
    frame = _numeric_frame(frame, path)
    features = [c for c in frame.columns if c != target]
    if not features:
        raise DataFormatError(f"{path}: no feature columns besides '{target}'")
    if len(frame) < 2:
        raise DataFormatError(f"{path}: need at least two rows, got {len(frame)}")

    X = frame[features].to_numpy()
    y = frame[[target]].to_numpy()
    train, test = split_indices(len(frame), seed)
    mean = X[train].mean(axis=0)
    std = X[train].std(axis=0)
    std[std == 0] = 1.0
    X = (X - mean) / std

    side = image_side_for(len(features)) if image_reshape else None
    if side is not None:
        X = pad_to_square(X, side)
        logger.info(f"Padded {len(features)} features to a {side}x{side} image")

    metadata = {
        "format_version": FORMAT_VERSION,
        "source": str(path),
        "seed": seed,
        "n_train": int(len(train)),
        "n_test": int(len(test)),
    }
    return TabularDataset(
        X[train],
        y[train],
        X[test],
        y[test],
        features,
        target,
        side,
        mean,
        std,
        metadata,
    )


def write_tabular_dataset(dataset: TabularDataset, path: str) -> Path:
    """Write the processed dataset as CSV (with a split column) plus JSON sidecar."""
    csv_path = Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    width = dataset.X_train.shape[1]
    columns = [f"f{k}" for k in range(width)]
    parts = []
    for split, X, y in (
        ("train", dataset.X_train, dataset.y_train),
        ("test", dataset.X_test, dataset.y_test),
    ):
        part = pd.DataFrame(X, columns=columns)
        part[dataset.target] = y[:, 0]
        part.insert(0, "split", split)
        parts.append(part)
    pd.concat(parts, ignore_index=True).to_csv(
        csv_path, index=False, float_format="%.17g"
    )
    sidecar = {
        "feature_names": dataset.feature_names,
        "target": dataset.target,
        "image_side": dataset.image_side,
        "mean": dataset.mean.tolist(),
        "std": dataset.std.tolist(),
        "metadata": dataset.metadata,
    }
    csv_path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
    return csv_path


def read_tabular_dataset(path: str) -> TabularDataset:
    """Inverse of :func:`write_tabular_dataset`."""
    csv_path = Path(path)
    sidecar_path = csv_path.with_suffix(".json")
    if not sidecar_path.exists():
        raise DataFormatError(f"Missing metadata sidecar {sidecar_path}")
    sidecar = json.loads(sidecar_path.read_text())
    frame = pd.read_csv(csv_path, float_precision="round_trip")
    target = sidecar["target"]
    feature_columns = [c for c in frame.columns if c not in ("split", target)]

    def arrays(split: str):
        rows = frame[frame["split"] == split]
        return rows[feature_columns].to_numpy(), rows[[target]].to_numpy()

    X_train, y_train = arrays("train")
    X_test, y_test = arrays("test")
    return TabularDataset(
        X_train,
        y_train,
        X_test,
        y_test,
        sidecar["feature_names"],
        target,
        sidecar["image_side"],
        np.asarray(sidecar["mean"]),
        np.asarray(sidecar["std"]),
        sidecar.get("metadata", {}),
    )


PATTERN_A = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]])
PATTERN_B = np.array([[0.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 0.0]])


def generate_shifted_patterns(
    n: int, side: int, rng: np.random.Generator, noise: float = 0.1
) -> pd.DataFrame:
    """Images holding one of two 3×3 stamps at a random offset.

    The target is +1 for the cross-shaped stamp and −1 for the X-shaped one.
    Pixels are the columns ``p0 .. p{side²-1}`` (row-major) and the target
    column is ``y``.
    """
    if side < 3:
        raise DataFormatError(f"Pattern images need side >= 3, got {side}")
    images = noise * rng.standard_normal((n, side, side))
    labels = rng.integers(0, 2, size=n)
    rows = rng.integers(0, side - 2, size=n)
    cols = rng.integers(0, side - 2, size=n)
    for k in range(n):
        stamp = PATTERN_B if labels[k] else PATTERN_A
        images[k, rows[k] : rows[k] + 3, cols[k] : cols[k] + 3] += stamp
    frame = pd.DataFrame(
        images.reshape(n, side * side), columns=[f"p{i}" for i in range(side * side)]
    )
    frame["y"] = np.where(labels == 1, 1.0, -1.0)
    return frame
