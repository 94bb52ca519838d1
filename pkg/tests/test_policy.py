"""Tests for the residual policy."""

import math

import numpy as np
import pytest

from leapstack.config import CommandMode, LeapConfig, StanceAccelConfig
from leapstack.control.gait import schedule_at
from leapstack.exceptions import CheckpointError, ConfigHashMismatchError
from leapstack.learning.policy import (
    OBS_DIM,
    PolicyParams,
    combine,
    compose,
    forward,
    load_checkpoint,
    observe,
    policy_action,
    save_checkpoint,
)
from leapstack.models.commands import JumpTask, ResidualAction, StanceCommand
from leapstack.models.state import RigidBodyState

SCALE = np.array([5.0, 5.0, 5.0, 10.0, 0.3, 0.3])


def random_params(seed: int = 0, hidden: int = 8) -> PolicyParams:
    rng = np.random.default_rng(seed)
    size = PolicyParams.zeros(hidden).size
    return PolicyParams.from_flat(
        rng.normal(0.0, 0.5, size),
        rng.normal(0.0, 0.1, OBS_DIM),
        rng.uniform(0.5, 2.0, OBS_DIM),
        hidden,
    )


def residual(*values: float) -> ResidualAction:
    scaled = np.array(values, dtype=float)
    return ResidualAction(raw=np.clip(scaled / SCALE, -1.0, 1.0), scaled=scaled)


class TestObserve:
    """Tests for the observation vector."""

    def test_at_target(self, stand):
        """Test zero displacement and yaw error on the target."""
        task = JumpTask((0.0, 0.0, 0.0), stand.position, 0.0, 0.5)
        obs = observe(stand, task, schedule_at(0.0))
        assert obs.displacement_to_target.tolist() == [0.0, 0.0, 0.0]
        assert obs.yaw_to_target == 0.0
        assert obs.remaining_cycle_time == pytest.approx(1.0)

    def test_forward_task(self, stand):
        """Test a 1 m forward task from the origin."""
        start = np.array([0.0, 0.0, stand.position[2]])
        obs = observe(stand, JumpTask((1.0, 0.0, 0.0), start, 0.0, 0.5), schedule_at(0.2))
        assert obs.displacement_to_target == pytest.approx([1.0, 0.0, 0.0])

    def test_yaw_wrapped(self, model):
        """Test the yaw error is wrapped to (-pi, pi]."""
        state = RigidBodyState.nominal_stand(model, yaw=3.0)
        task = JumpTask((0.0, 0.0, 0.5), state.position, 3.0, 0.5)
        obs = observe(state, task, schedule_at(0.0))
        assert obs.yaw_to_target == pytest.approx(0.5)
        task = JumpTask((0.0, 0.0, 0.5), state.position, -3.0, 0.5)
        wrapped = observe(state, task, schedule_at(0.0)).yaw_to_target
        assert wrapped == pytest.approx(-5.5 + 2 * math.pi)

    def test_vector_layout(self, stand):
        """Test the flat vector has 29 entries in field order."""
        task = JumpTask((1.0, 0.0, 0.0), stand.position, 0.0, 0.5)
        vec = observe(stand, task, schedule_at(0.75)).as_vector()
        assert vec.shape == (OBS_DIM,)
        assert vec[:3].tolist() == stand.position.tolist()
        assert vec[24] == pytest.approx(1.0)
        assert vec[-1] == pytest.approx(0.25)


class TestPolicyParams:
    """Tests for PolicyParams."""

    def test_default_size(self):
        """Test the 1x256 network has 9222 parameters."""
        params = PolicyParams.zeros()
        assert params.size == 9222
        assert params.flatten().shape == (9222,)

    def test_flat_roundtrip(self):
        """Test flatten and from_flat are inverse."""
        params = random_params()
        again = params.with_flat(params.flatten())
        assert np.array_equal(again.w1, params.w1)
        assert np.array_equal(again.b2, params.b2)

    def test_wrong_flat_size(self):
        """Test a flat vector of the wrong length is rejected."""
        with pytest.raises(ValueError):
            PolicyParams.from_flat(np.zeros(10), np.zeros(OBS_DIM), np.ones(OBS_DIM), 8)

    def test_std_floor(self):
        """Test zero standard deviations are floored."""
        params = PolicyParams.zeros(4).with_stats(np.zeros(OBS_DIM), np.zeros(OBS_DIM))
        assert np.all(params.obs_std == 1e-6)

    def test_initial_output_layer_zero(self):
        """Test training starts from a zero residual."""
        params = PolicyParams.initial(np.random.default_rng(0), hidden_size=16)
        assert np.any(params.w1 != 0.0)
        assert np.all(params.w2 == 0.0)
        assert forward(params, np.ones(OBS_DIM)).tolist() == [0.0] * 6


class TestForward:
    """Tests for the forward pass."""

    def test_zero_network(self):
        """Test all-zero params give zero output."""
        assert forward(PolicyParams.zeros(), np.ones(OBS_DIM)).tolist() == [0.0] * 6
        action = policy_action(PolicyParams.zeros(), np.ones(OBS_DIM), SCALE)
        assert action.scaled.tolist() == [0.0] * 6

    def test_output_range(self):
        """Test every output lies in (-1, 1)."""
        rng = np.random.default_rng(1)
        params = random_params(hidden=32)
        for _ in range(20):
            raw = forward(params, rng.normal(0.0, 10.0, OBS_DIM))
            assert np.all(np.abs(raw) < 1.0)

    def test_reference_forward_pass(self):
        """Test against an extended-precision reference computation."""
        params = random_params(seed=4, hidden=16)
        obs = np.random.default_rng(5).normal(size=OBS_DIM)
        ld = np.longdouble
        x = (obs.astype(ld) - params.obs_mean.astype(ld)) / params.obs_std.astype(ld)
        hidden = np.tanh(params.w1.astype(ld) @ x + params.b1.astype(ld))
        expected = np.tanh(params.w2.astype(ld) @ hidden + params.b2.astype(ld))
        assert forward(params, obs) == pytest.approx(expected.astype(float), abs=1e-6)


class TestCompose:
    """Tests for command composition."""

    def test_zero_residual_identity(self):
        """Test a zero residual leaves the base command unchanged."""
        base = StanceCommand(
            linear_acceleration=np.array([1.0, 2.0, 3.0]), yaw_angular_acceleration=1.0
        )
        out = compose(base, ResidualAction.zeros())
        assert out.as_vector().tolist() == base.as_vector().tolist()
        assert out.clipped is False

    def test_roll_sum(self):
        """Test a roll residual adds to the base roll."""
        out = compose(StanceCommand.zeros(), residual(0.0, 0.0, 0.0, 0.0, 0.1, 0.0))
        assert out.roll == pytest.approx(0.1)

    def test_clip_at_bound(self):
        """Test a sum beyond the acceleration bound is clipped and flagged."""
        cfg = StanceAccelConfig()
        base = StanceCommand(linear_acceleration=np.array([cfg.max_linear_accel, 0.0, 0.0]))
        out = compose(base, residual(5.0, 0.0, 0.0, 0.0, 0.0, 0.0), cfg)
        assert out.linear_acceleration[0] == cfg.max_linear_accel
        assert out.clipped is True

    def test_modes(self):
        """Test the three command modes."""
        cfg = StanceAccelConfig()
        base = StanceCommand(linear_acceleration=np.array([0.0, 0.0, 4.0]))
        res = residual(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        full = combine(base, res, CommandMode.FULL, cfg)
        controller = combine(base, res, CommandMode.CONTROLLER_ONLY, cfg)
        policy = combine(base, res, CommandMode.POLICY_ONLY, cfg)
        assert full.linear_acceleration.tolist() == [1.0, 0.0, 4.0]
        assert controller.linear_acceleration.tolist() == [0.0, 0.0, 4.0]
        assert policy.linear_acceleration.tolist() == [1.0, 0.0, 0.0]


class TestCheckpoint:
    """Tests for checkpoint files."""

    def test_save_load(self, tmp_path):
        """Test params survive a checkpoint file."""
        config = LeapConfig()
        params = random_params(hidden=8)
        path = save_checkpoint(tmp_path / "policy.json", params, config, iteration=3)
        loaded, checkpoint = load_checkpoint(path, config)
        assert np.array_equal(loaded.flatten(), params.flatten())
        assert np.array_equal(loaded.obs_std, params.obs_std)
        assert checkpoint.iteration == 3
        assert checkpoint.hidden_size == 8

    def test_hash_mismatch(self, tmp_path):
        """Test a checkpoint from another episode config is refused."""
        path = save_checkpoint(tmp_path / "policy.json", random_params(), LeapConfig())
        other = LeapConfig.model_validate({"env": {"w_o": 2.0}})
        with pytest.raises(ConfigHashMismatchError):
            load_checkpoint(path, other)

    def test_ars_block_not_hashed(self, tmp_path):
        """Test training hyperparameters do not invalidate checkpoints."""
        path = save_checkpoint(tmp_path / "policy.json", random_params(), LeapConfig())
        other = LeapConfig.model_validate({"ars": {"seed": 9, "rollout_workers": 4}})
        load_checkpoint(path, other)

    def test_malformed(self, tmp_path):
        """Test unreadable checkpoints raise CheckpointError."""
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "missing.json")
