"""Tests for configuration and CLI argument parsing."""

import argparse
import json
import logging
import shutil
import sys
import tempfile
from pathlib import Path
from unittest.mock import patch

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))
from rpp_experiments.core.config import (
    ExperimentConfig,
    create_config_from_args,
    load_config,
    setup_logging,
)
from rpp_experiments.core.errors import ConfigError
from rpp_experiments.utils.cli import (
    parse_arguments,
    show_cache_help,
    show_examples,
)


class TestExperimentConfig:
    """Test configuration class, defaults and validation."""

    def test_default_config(self):
        config = ExperimentConfig()

        assert config.task == "inertia"
        assert config.model == "rpp"
        assert config.group is None
        assert config.sigma_a2 == 1e5
        assert config.sigma_b2 == 1.0
        assert config.lr == 3e-3
        assert config.depth == 3
        assert config.width == 128
        assert config.output_dir == "results"
        assert config.divergence_threshold == 1e8
        assert config.cache_enabled is True
        assert config.cache_file == "cache/basis_cache.json"

    @pytest.mark.parametrize(
        "changes, message",
        [
            ({"task": "swimmer"}, "Unknown task"),
            ({"model": "cnn"}, "Unknown model kind"),
            ({"sigma_a2": 0.0}, "Prior variances must be positive"),
            ({"sigma_b2": -1.0}, "Prior variances must be positive"),
            ({"lr": 0.0}, "Learning rate"),
            ({"lr_schedule": "step"}, "lr schedule"),
            ({"epochs": -1}, "epochs"),
            ({"batch_size": 0}, "batch_size"),
            ({"width": 0}, "depth and width"),
            ({"workers": 0}, "workers"),
            ({"task": "csv-regression"}, "requires csv_path"),
        ],
    )
    def test_validation(self, changes, message):
        with pytest.raises(ConfigError, match=message):
            ExperimentConfig(**changes).validate()

    def test_validate_returns_self(self):
        config = ExperimentConfig()
        assert config.validate() is config

    def test_json_round_trip(self):
        config = ExperimentConfig(task="pendulum", group="O(2)z", epochs=7, seed=3)
        assert ExperimentConfig.from_json(config.to_json()) == config

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="Unknown config keys: colour"):
            ExperimentConfig.from_dict({"task": "inertia", "colour": "red"})

    def test_invalid_json(self):
        with pytest.raises(ConfigError, match="not valid JSON"):
            ExperimentConfig.from_json("{task: inertia")

    def test_hash_ignores_output_settings(self):
        config = ExperimentConfig(seed=1)
        moved = config.replace(output_dir="elsewhere", workers=8, log_level="DEBUG")
        assert config.config_hash() == moved.config_hash()
        assert config.config_hash() != config.replace(seed=2).config_hash()
        assert len(config.config_hash()) == 12


class TestArgumentParsing:
    """Test command-line argument parsing."""

    def test_no_command(self):
        args = parse_arguments([])
        assert args.command is None
        assert args.quiet is False
        assert args.no_cache is False

    def test_train_flags(self):
        args = parse_arguments(
            ["train", "--task", "pendulum", "--epochs", "5", "--sigma-b2", "0.1"]
        )
        assert args.command == "train"
        assert args.task == "pendulum"
        assert args.epochs == 5
        assert args.sigma_b2 == 0.1
        assert args.model is None
        assert args.format == ["csv"]

    def test_shared_flags_before_or_after_command(self):
        before = parse_arguments(["--log-level", "DEBUG", "--quiet", "train"])
        assert before.log_level == "DEBUG"
        assert before.quiet is True
        after = parse_arguments(["train", "--log-level", "WARNING", "--no-cache"])
        assert after.log_level == "WARNING"
        assert after.no_cache is True

    def test_format_validation(self):
        args = parse_arguments(["experiment", "--format", "csv", "json", "excel"])
        assert args.format == ["csv", "json", "excel"]
        assert args.family == "inertia"
        assert args.seeds == 10
        with pytest.raises(SystemExit):
            parse_arguments(["experiment", "--format", "pdf"])

    def test_numeric_argument_validation(self):
        with pytest.raises(SystemExit):
            parse_arguments(["train", "--epochs", "many"])
        with pytest.raises(SystemExit):
            parse_arguments(["train", "--model", "transformer"])

    def test_grid_values(self):
        args = parse_arguments(
            ["ablate", "--sigma-a2-values", "1e-2,1", "--sigma-b2-values", "1e4"]
        )
        assert args.sigma_a2_values == [1e-2, 1.0]
        assert args.sigma_b2_values == [1e4]
        with pytest.raises(SystemExit):
            parse_arguments(["ablate", "--sigma-a2-values", "1,abc"])

    def test_basis_requires_reps(self):
        args = parse_arguments(
            ["basis", "--group", "SO(2)", "--rep-in", "V", "--rep-out", "V"]
        )
        assert (args.group, args.rep_in, args.rep_out) == ("SO(2)", "V", "V")
        with pytest.raises(SystemExit):
            parse_arguments(["basis", "--group", "SO(2)"])

    def test_ensemble_and_ingest(self):
        args = parse_arguments(["ensemble", "--k", "3", "--tasks", "inertia"])
        assert args.k == 3
        assert args.tasks == ["inertia"]
        args = parse_arguments(["ingest", "--csv", "data.csv", "--no-image"])
        assert args.target == "y"
        assert args.no_image is True

    def test_version(self, capsys):
        with pytest.raises(SystemExit):
            parse_arguments(["--version"])
        assert "RPP Experiments v" in capsys.readouterr().out


class TestConfigCreation:
    """Test configuration creation from arguments and files."""

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_create_config_from_args(self):
        args = parse_arguments(
            [
                "train",
                "--task",
                "windy-pendulum",
                "--model",
                "emlp",
                "--group",
                "SO(2)z",
                "--out",
                "./runs-out",
                "--no-cache",
            ]
        )
        config = create_config_from_args(args)
        assert config.task == "windy-pendulum"
        assert config.model == "emlp"
        assert config.group == "SO(2)z"
        assert config.output_dir == "./runs-out"
        assert config.cache_enabled is False
        assert config.epochs is None

    def test_flags_override_config_file(self):
        path = Path(self.temp_dir) / "run.json"
        path.write_text(json.dumps({"task": "pendulum", "seed": 4, "lr": 0.01}))
        args = parse_arguments(["train", "--config", str(path), "--seed", "7"])
        config = create_config_from_args(args)
        assert config.task == "pendulum"
        assert config.lr == 0.01
        assert config.seed == 7

    def test_no_image_flag(self):
        args = argparse.Namespace(no_image=True, csv="data.csv", task="csv-regression")
        config = create_config_from_args(args)
        assert config.image_reshape is False
        assert config.csv_path == "data.csv"

    def test_missing_config_file(self):
        with pytest.raises(ConfigError, match="not found"):
            load_config(str(Path(self.temp_dir) / "absent.json"))

    def test_setup_logging_handlers(self):
        log_file = str(Path(self.temp_dir) / "run.log")
        with patch("logging.basicConfig") as basic_config:
            logger = setup_logging("debug", log_file)
        assert isinstance(logger, logging.Logger)
        kwargs = basic_config.call_args.kwargs
        assert kwargs["level"] == logging.DEBUG
        assert isinstance(kwargs["handlers"][0], logging.FileHandler)
        kwargs["handlers"][0].close()

    def test_setup_logging_console_only(self):
        with patch("logging.basicConfig") as basic_config:
            setup_logging("INFO", None)
        handlers = basic_config.call_args.kwargs["handlers"]
        assert len(handlers) == 1
        assert not isinstance(handlers[0], logging.FileHandler)


class TestHelpOutput:
    def test_show_examples(self, capsys):
        show_examples()
        out = capsys.readouterr().out
        assert "RPP Experiments - Usage Examples" in out
        for command in ("train", "experiment", "ablate", "ensemble", "basis"):
            assert f"main.py {command}" in out

    def test_show_cache_help(self, capsys):
        show_cache_help()
        out = capsys.readouterr().out
        assert "--clear-cache" in out
        assert "cache/basis_cache.json" in out
