"""Tests for configuration loading and hashing."""

from pathlib import Path

import pytest

from leapstack.config import (
    CommandMode,
    LeapConfig,
    RaibertVelocitySource,
    config_hash,
    dump_config,
    load_config,
    parse_config_text,
    robot_model,
    write_config,
)
from leapstack.exceptions import ConfigError

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


class TestDefaults:
    """Tests for built-in defaults."""

    def test_reward_weights(self, config):
        """Test the default reward weights and alive bonus."""
        assert config.env.alive_bonus == 4.0
        assert (config.env.w_p, config.env.w_o, config.env.w_c) == (1.0, 5.0, 0.4)

    def test_policy_decimation(self, config):
        """Test a 50 Hz policy over a 500 Hz simulator."""
        assert config.policy_decimation == 10

    def test_sequence(self, config):
        """Test the default five-jump sequence."""
        assert config.env.max_jumps == 5
        assert config.env.jump_sequence[1] == (1.0, 0.0, 0.0)
        assert config.env.command_mode == CommandMode.FULL

    def test_robot_model(self, config):
        """Test the robot model mirrors its config block."""
        model = robot_model(config.robot)
        assert model.mass == config.robot.mass
        assert model.geometry.thigh_length == config.robot.thigh_length
        assert model.hip_offsets.shape == (4, 3)


class TestParseConfigText:
    """Tests for parsing TOML text."""

    def test_empty(self):
        """Test an empty document resolves to defaults."""
        assert parse_config_text("") == LeapConfig()

    def test_partial_block(self):
        """Test keys missing from a block fall back to defaults."""
        config = parse_config_text("[env]\nw_p = 2.0\n")
        assert config.env.w_p == 2.0
        assert config.env.w_o == 5.0

    def test_enum_values(self):
        """Test string enums parse."""
        config = parse_config_text(
            '[env]\ncommand_mode = "controller-only"\n[swing]\ndesired_velocity = "zero"\n'
        )
        assert config.env.command_mode == CommandMode.CONTROLLER_ONLY
        assert config.swing.desired_velocity == RaibertVelocitySource.ZERO

    def test_malformed_value(self):
        """Test a wrongly typed value names the field and its line."""
        with pytest.raises(ConfigError) as exc_info:
            parse_config_text('[policy]\nhidden_size = 8\n\n[env]\nw_o = "heavy"\n', path="x.toml")
        error = exc_info.value
        assert error.field == "env.w_o"
        assert error.line == 5
        assert error.path == "x.toml"
        assert "field=env.w_o" in str(error)

    def test_out_of_range(self):
        """Test field constraints are enforced."""
        with pytest.raises(ConfigError) as exc_info:
            parse_config_text("[gait]\nstance_duration = 0.0\n")
        assert exc_info.value.field == "gait.stance_duration"

    def test_unknown_key(self):
        """Test unknown keys are rejected."""
        with pytest.raises(ConfigError) as exc_info:
            parse_config_text("[env]\nw_x = 1.0\n")
        assert exc_info.value.field == "env.w_x"

    def test_syntax_error(self):
        """Test TOML syntax errors carry a line number."""
        with pytest.raises(ConfigError) as exc_info:
            parse_config_text("[env]\nw_o = = 1\n")
        assert exc_info.value.line == 2

    def test_top_exceeds_directions(self):
        """Test b > N is rejected."""
        with pytest.raises(ConfigError) as exc_info:
            parse_config_text("[ars]\nnum_directions = 4\ntop_directions = 8\n")
        assert exc_info.value.field.startswith("ars")

    def test_empty_sequence(self):
        """Test an empty jump sequence is rejected."""
        with pytest.raises(ConfigError):
            parse_config_text("[env]\njump_sequence = []\n")

    def test_asymmetric_inertia(self):
        """Test the inertia tensor must be symmetric."""
        with pytest.raises(ConfigError):
            parse_config_text(
                "[robot]\ninertia = [[0.1, 0.01, 0.0], [0.0, 0.2, 0.0], [0.0, 0.0, 0.3]]\n"
            )


class TestLoadConfig:
    """Tests for config files."""

    def test_none_is_default(self):
        """Test no path gives defaults."""
        assert load_config(None) == LeapConfig()

    def test_missing_file(self, tmp_path):
        """Test an unreadable file is a config error."""
        with pytest.raises(ConfigError) as exc_info:
            load_config(tmp_path / "absent.toml")
        assert exc_info.value.path == str(tmp_path / "absent.toml")

    def test_shipped_default(self):
        """Test the shipped default file matches the built-in defaults."""
        assert load_config(CONFIG_DIR / "default.toml") == LeapConfig()

    def test_shipped_smoke(self):
        """Test the shipped smoke config."""
        config = load_config(CONFIG_DIR / "smoke.toml")
        assert config.policy.hidden_size == 16
        assert config.env.max_jumps == 2
        assert config.ars.iterations == 2

    def test_snapshot(self, tmp_path, short_config):
        """Test a written snapshot reloads to the same config."""
        path = tmp_path / "config.toml"
        write_config(short_config, path)
        assert load_config(path) == short_config
        assert "[ars]" in dump_config(short_config)


class TestConfigHash:
    """Tests for the episode-config hash."""

    def test_stable(self):
        """Test equal configs hash equally."""
        assert config_hash(LeapConfig()) == config_hash(parse_config_text(""))

    def test_ignores_ars(self):
        """Test training hyper-parameters do not change the hash."""
        tuned = parse_config_text("[ars]\nseed = 9\nrollout_workers = 4\niterations = 1\n")
        assert config_hash(tuned) == config_hash(LeapConfig())

    def test_episode_fields(self):
        """Test episode-shaping fields change the hash."""
        base = config_hash(LeapConfig())
        assert config_hash(parse_config_text("[env]\nw_o = 4.0\n")) != base
        assert config_hash(parse_config_text("[policy]\nhidden_size = 8\n")) != base
