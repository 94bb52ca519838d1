"""Tests for the command-line interface."""

import json
from pathlib import Path

import pytest

from leapstack.cli import THREADS_ENV, main, resolve_policy, resolve_workers
from leapstack.config import CommandMode, LeapConfig, dump_config
from leapstack.constants import LogSchema
from leapstack.exceptions import ConfigError, ConfigHashMismatchError, ExitCode
from leapstack.learning.ars import CurvePoint, write_learning_curve
from leapstack.learning.policy import PolicyParams, save_checkpoint

SMOKE_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "smoke.toml"


@pytest.fixture
def short_config_file(short_config, tmp_path):
    """Short config written as TOML."""
    path = tmp_path / "short.toml"
    path.write_text(dump_config(short_config), encoding="utf-8")
    return path


@pytest.fixture
def checkpoint(short_config, tmp_path):
    """Zero-residual checkpoint produced under the short config."""
    return save_checkpoint(tmp_path / "policy.json", PolicyParams.zeros(4), short_config, 3)


class TestResolveWorkers:
    """Tests for worker-count precedence."""

    def test_flag_wins(self, monkeypatch):
        """Test --workers beats the environment and the config."""
        monkeypatch.setenv(THREADS_ENV, "3")
        assert resolve_workers(5, LeapConfig()) == 5

    def test_environment(self, monkeypatch):
        """Test the environment beats the config."""
        monkeypatch.setenv(THREADS_ENV, "3")
        assert resolve_workers(None, LeapConfig()) == 3

    def test_config(self, monkeypatch):
        """Test the config value is the fallback."""
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert resolve_workers(None, LeapConfig()) == 1

    @pytest.mark.parametrize("value", ["zero", "0", "-2"])
    def test_invalid_environment(self, monkeypatch, value):
        """Test a bad environment value is a config error."""
        monkeypatch.setenv(THREADS_ENV, value)
        with pytest.raises(ConfigError):
            resolve_workers(None, LeapConfig())

    def test_invalid_flag(self):
        """Test --workers 0 is a config error."""
        with pytest.raises(ConfigError):
            resolve_workers(0, LeapConfig())


class TestResolvePolicy:
    """Tests for policy and episode-config resolution."""

    def test_no_checkpoint(self, config):
        """Test the zero residual is used without a checkpoint."""
        params, resolved = resolve_policy(config, None, None, None)
        assert not params.flatten().any()
        assert resolved == config

    def test_overrides_after_verification(self, short_config, checkpoint):
        """Test mode and task overrides do not trip the hash check."""
        params, resolved = resolve_policy(short_config, str(checkpoint), "policy-only", "forwardx2")
        assert params.hidden_size == 4
        assert resolved.env.command_mode == CommandMode.POLICY_ONLY
        assert resolved.env.jump_sequence == ((1.0, 0.0, 0.0), (1.0, 0.0, 0.0))

    def test_mismatch(self, config, checkpoint):
        """Test a checkpoint from another config is refused."""
        with pytest.raises(ConfigHashMismatchError):
            resolve_policy(config, str(checkpoint), None, None)


class TestMain:
    """Tests for command dispatch and exit codes."""

    def test_version(self, capsys):
        """Test --version prints and exits cleanly."""
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])
        assert exc_info.value.code == 0
        assert "leapstack" in capsys.readouterr().out

    def test_bad_config(self, tmp_path):
        """Test an invalid config exits with the config error code."""
        bad = tmp_path / "bad.toml"
        bad.write_text("[env]\nw_o = \"heavy\"\n", encoding="utf-8")
        assert main(["train", "--config", str(bad), "--out", str(tmp_path / "run")]) == (
            ExitCode.CONFIG_ERROR
        )

    def test_bad_task(self, tmp_path):
        """Test an invalid task preset exits with the config error code."""
        code = main(["evaluate", "--task", "sideways", "--out", str(tmp_path / "eval.json")])
        assert code == ExitCode.CONFIG_ERROR

    def test_checkpoint_mismatch(self, checkpoint, tmp_path):
        """Test a checkpoint from another config exits with code 4."""
        code = main(["rollout", "--checkpoint", str(checkpoint), "--out", str(tmp_path / "r")])
        assert code == ExitCode.CHECKPOINT_MISMATCH

    def test_missing_checkpoint(self, tmp_path):
        """Test an unreadable checkpoint exits with code 4."""
        code = main(
            ["evaluate", "--checkpoint", str(tmp_path / "absent.json"), "--episodes", "1"]
        )
        assert code == ExitCode.CHECKPOINT_MISMATCH

    def test_unknown_figure(self, tmp_path):
        """Test an unknown figure key exits with code 5."""
        code = main(["export-figures", "heatmap", "a.csv", "--out", str(tmp_path / "f.csv")])
        assert code == ExitCode.UNKNOWN_FIGURE

    def test_unwritable_output(self, tmp_path):
        """Test an output path under a regular file exits with code 3."""
        blocker = tmp_path / "file"
        blocker.write_text("", encoding="utf-8")
        source = write_learning_curve(tmp_path / "curve.csv", [CurvePoint(0, 0, 1.0, 0.0, 0.0)])
        code = main(["export-figures", "curve", str(source), "--out", str(blocker / "x.csv")])
        assert code == ExitCode.OUTPUT_ERROR

    def test_export_curve(self, tmp_path):
        """Test curve export through the CLI."""
        source = write_learning_curve(tmp_path / "curve.csv", [CurvePoint(0, 0, 1.0, 0.0, 0.0)])
        out = tmp_path / "figures" / "curve.csv"
        assert main(["export-figures", "curve", str(source), "--out", str(out)]) == ExitCode.OK
        assert out.read_text(encoding="utf-8").splitlines()[0] == LogSchema.FIGURE

    @pytest.mark.slow
    def test_train_smoke(self, tmp_path, monkeypatch):
        """Test a tiny training run writes its outputs."""
        monkeypatch.delenv(THREADS_ENV, raising=False)
        out = tmp_path / "run"
        code = main(["train", "--config", str(SMOKE_CONFIG), "--seed", "1", "--out", str(out)])
        assert code == ExitCode.OK
        lines = (out / "learning_curve.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == LogSchema.LEARNING_CURVE
        assert lines[1] == "iteration,episodes,mean_return,std_return,wall_clock_s"
        assert len(lines) == 2 + 3
        assert (out / "config.toml").exists()
        assert (out / "policy.json").exists()

    @pytest.mark.slow
    def test_rollout(self, short_config_file, tmp_path):
        """Test a rollout writes a trajectory and a summary."""
        out = tmp_path / "rollout"
        code = main(
            [
                "rollout",
                "--config",
                str(short_config_file),
                "--task",
                "in_place",
                "--mode",
                "controller-only",
                "--out",
                str(out),
            ]
        )
        assert code == ExitCode.OK
        assert (out / "trajectory.csv").read_text(encoding="utf-8").startswith(
            LogSchema.TRAJECTORY
        )
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert summary["policy_steps"] > 0
