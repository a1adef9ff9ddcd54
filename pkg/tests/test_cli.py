"""Unit tests for the command-line interface."""

import csv
import json

import pytest

from sim_secrecy.harness.cli import build_parser, main
from sim_secrecy.harness.evaluation import COLUMNS

SMALL = {
    "scenario": {"layers": 2, "atoms_per_layer": 4, "num_users": 2, "slots_per_episode": 5},
    "trainer": {
        "hidden_size": 8,
        "attention_heads": 2,
        "lstm_layers": 1,
        "history_length": 3,
        "batch_size": 8,
        "update_epochs": 2,
        "warmup_episodes": 2,
        "episodes": 1,
        "eval_episodes": 1,
        "checkpoint_every": 1,
        "buffer_capacity": 100,
    },
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(SMALL))
    return path


def _rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


class TestParser:
    """Tests for argument parsing."""

    def test_requires_command(self):
        """Should exit with a usage error without a subcommand."""
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args([])

        assert exc.value.code == 2

    def test_sweep_axis_choices(self):
        """Should reject an unknown sweep axis at parse time."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["sweep", "--axis", "temperature", "--values", "1"])


class TestBaseline:
    """Tests for the baseline command."""

    def test_writes_identical_tables(self, config_path, tmp_path):
        """Should produce byte-identical CSVs for two runs with the same seed."""
        first, second = tmp_path / "a", tmp_path / "b"
        args = ["baseline", "--strategy", "2", "--config", str(config_path), "--episodes", "2"]

        assert main([*args, "--out", str(first)]) == 0
        assert main([*args, "--out", str(second)]) == 0

        name = "baseline_strategy2.csv"
        assert (first / name).read_bytes() == (second / name).read_bytes()
        rows = _rows(first / name)
        assert list(rows[0]) == list(COLUMNS)
        assert rows[0]["episodes"] == "2"
        assert (first / "baseline_strategy2.jsonl").exists()

    def test_unknown_strategy(self, config_path, tmp_path, capsys):
        """Should exit with 2 for a strategy outside 1-3."""
        code = main(
            ["baseline", "--strategy", "7", "--config", str(config_path), "--out", str(tmp_path)]
        )

        assert code == 2
        assert "UNKNOWN_STRATEGY" in capsys.readouterr().err

    def test_missing_config(self, tmp_path, capsys):
        """Should exit with 2 and name the missing config file."""
        missing = tmp_path / "absent.json"

        code = main(["baseline", "--strategy", "1", "--config", str(missing)])

        assert code == 2
        err = capsys.readouterr().err
        assert "CONFIG_INVALID" in err
        assert str(missing) in err


class TestSweep:
    """Tests for the sweep command."""

    def test_one_row_per_value(self, config_path, tmp_path):
        """Should write one row per swept value."""
        code = main(
            [
                "sweep",
                "--axis",
                "pmax",
                "--values",
                "10,20,30",
                "--config",
                str(config_path),
                "--episodes",
                "1",
                "--out",
                str(tmp_path),
            ]
        )

        rows = _rows(tmp_path / "sweep_pmax.csv")
        assert code == 0
        assert [r["value"] for r in rows] == ["10.0", "20.0", "30.0"]
        assert {r["axis"] for r in rows} == {"pmax"}

    def test_empty_values(self, config_path, tmp_path, capsys):
        """Should exit with 2 for an empty value list."""
        code = main(
            [
                "sweep",
                "--axis",
                "kappa",
                "--values",
                ",",
                "--config",
                str(config_path),
                "--out",
                str(tmp_path),
            ]
        )

        assert code == 2
        assert "INVALID_ARGUMENT" in capsys.readouterr().err


class TestTrainAndEvaluate:
    """Tests for training followed by checkpoint evaluation."""

    def test_train_then_evaluate(self, config_path, tmp_path):
        """Should train, checkpoint and re-evaluate the final policy with a trace."""
        train_dir, eval_dir = tmp_path / "train", tmp_path / "eval"

        assert main(["train", "--config", str(config_path), "--out", str(train_dir)]) == 0
        final = train_dir / "checkpoints" / "final.npz"
        assert final.exists()
        assert (train_dir / "metrics.jsonl").exists()
        assert json.loads((train_dir / "config.json").read_text())["trainer"]["episodes"] == 1

        code = main(
            ["evaluate", "--checkpoint", str(final), "--episodes", "1", "--out", str(eval_dir)]
        )

        assert code == 0
        trace = (eval_dir / "trace.jsonl").read_text().splitlines()
        assert len(trace) == SMALL["scenario"]["slots_per_episode"]
        assert _rows(eval_dir / "evaluate.csv")[0]["run_id"] == "final"

    def test_evaluate_missing_checkpoint(self, tmp_path):
        """Should exit with 1 for a missing checkpoint."""
        code = main(["evaluate", "--checkpoint", str(tmp_path / "none.npz")])

        assert code == 1
