"""
Residual policy: observation vector, tanh MLP and command composition.

The network has one hidden layer:

    raw = tanh(W2 · tanh(W1 · (obs − mean) / std + b1) + b2)

Its flat parameter vector holds W1, b1, W2, b2 in that order (row-major);
the observation statistics travel with the parameters but are not part of
the vector ARS perturbs.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Final

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from leapstack.config import CommandMode, LeapConfig, StanceAccelConfig, config_hash
from leapstack.constants import RobotConstants
from leapstack.control.stance import clip_command
from leapstack.exceptions import CheckpointError, ConfigHashMismatchError
from leapstack.models.commands import (
    ACTION_DIM,
    JumpTask,
    LegSchedule,
    ResidualAction,
    StanceCommand,
)
from leapstack.models.state import FloatArray, RigidBodyState

logger = logging.getLogger(__name__)

OBS_DIM: Final[int] = 29
"""Observation size."""

STD_FLOOR: Final[float] = 1e-6
"""Lower bound on observation standard deviations."""

CHECKPOINT_VERSION: Final[int] = 1


def _wrap(angle: float) -> float:
    return math.atan2(math.sin(angle), math.cos(angle))


@dataclass(frozen=True, eq=False)
class Observation:
    """
    Policy input.

    Attributes:
        base_position: CoM position (world).
        base_orientation_rpy: Roll, pitch, yaw.
        base_linear_velocity: CoM velocity (world).
        base_angular_velocity: Angular velocity (body).
        foot_positions_body: 4x3 CoM-to-foot vectors (body).
        displacement_to_target: Landing target minus current position (world).
        yaw_to_target: Wrapped target yaw minus current yaw.
        remaining_cycle_time: Time to the next cycle boundary (s).
    """

    base_position: FloatArray
    base_orientation_rpy: FloatArray
    base_linear_velocity: FloatArray
    base_angular_velocity: FloatArray
    foot_positions_body: FloatArray
    displacement_to_target: FloatArray
    yaw_to_target: float
    remaining_cycle_time: float

    def as_vector(self) -> FloatArray:
        """Flat 29-value vector in field order."""
        return np.concatenate(
            [
                self.base_position,
                self.base_orientation_rpy,
                self.base_linear_velocity,
                self.base_angular_velocity,
                np.asarray(self.foot_positions_body).ravel(),
                self.displacement_to_target,
                [self.yaw_to_target, self.remaining_cycle_time],
            ]
        )


def observe(state: RigidBodyState, task: JumpTask, schedule: LegSchedule) -> Observation:
    """Build the observation from a (estimated) state, task and schedule."""
    rpy = state.rpy
    return Observation(
        base_position=np.array(state.position),
        base_orientation_rpy=np.array(rpy),
        base_linear_velocity=np.array(state.linear_velocity),
        base_angular_velocity=np.array(state.angular_velocity),
        foot_positions_body=state.feet_in_body(),
        displacement_to_target=task.target_position - state.position,
        yaw_to_target=_wrap(task.target_yaw - float(rpy[2])),
        remaining_cycle_time=min(max(schedule.remaining_cycle_time, 0.0), schedule.cycle_duration),
    )


@dataclass(frozen=True, eq=False)
class PolicyParams:
    """
    MLP weights and observation statistics.

    Attributes:
        w1: hidden x obs weights.
        b1: hidden biases.
        w2: action x hidden weights.
        b2: action biases.
        obs_mean: Observation mean.
        obs_std: Observation standard deviation (>= 1e-6).
    """

    w1: FloatArray
    b1: FloatArray
    w2: FloatArray
    b2: FloatArray
    obs_mean: FloatArray
    obs_std: FloatArray

    def __post_init__(self) -> None:
        hidden, obs_dim = np.shape(self.w1)
        if np.shape(self.b1) != (hidden,) or np.shape(self.w2)[1] != hidden:
            raise ValueError("inconsistent hidden layer shapes")
        if np.shape(self.b2) != (np.shape(self.w2)[0],):
            raise ValueError("inconsistent output layer shapes")
        if np.shape(self.obs_mean) != (obs_dim,) or np.shape(self.obs_std) != (obs_dim,):
            raise ValueError("observation statistics do not match W1")
        object.__setattr__(
            self, "obs_std", np.maximum(np.asarray(self.obs_std, dtype=np.float64), STD_FLOOR)
        )

    @property
    def hidden_size(self) -> int:
        return int(np.shape(self.w1)[0])

    @property
    def obs_dim(self) -> int:
        return int(np.shape(self.w1)[1])

    @property
    def action_dim(self) -> int:
        return int(np.shape(self.w2)[0])

    @property
    def size(self) -> int:
        """Length of the flat parameter vector."""
        h, o, a = self.hidden_size, self.obs_dim, self.action_dim
        return h * o + h + a * h + a

    def flatten(self) -> FloatArray:
        return np.concatenate([self.w1.ravel(), self.b1, self.w2.ravel(), self.b2])

    def with_flat(self, flat: FloatArray) -> PolicyParams:
        """Same statistics, new weights."""
        return PolicyParams.from_flat(
            flat, self.obs_mean, self.obs_std, self.hidden_size, self.action_dim
        )

    def with_stats(self, mean: FloatArray, std: FloatArray) -> PolicyParams:
        return PolicyParams(self.w1, self.b1, self.w2, self.b2, np.asarray(mean), np.asarray(std))

    @classmethod
    def from_flat(
        cls,
        flat: FloatArray,
        obs_mean: FloatArray,
        obs_std: FloatArray,
        hidden_size: int,
        action_dim: int = ACTION_DIM,
    ) -> PolicyParams:
        vec = np.asarray(flat, dtype=np.float64)
        obs_dim = int(np.shape(obs_mean)[0])
        sizes = [hidden_size * obs_dim, hidden_size, action_dim * hidden_size, action_dim]
        if vec.shape != (sum(sizes),):
            raise ValueError(f"expected {sum(sizes)} parameters, got {vec.shape}")
        w1, b1, w2, b2 = np.split(vec, np.cumsum(sizes)[:-1])
        return cls(
            w1=w1.reshape(hidden_size, obs_dim),
            b1=b1.copy(),
            w2=w2.reshape(action_dim, hidden_size),
            b2=b2.copy(),
            obs_mean=np.array(obs_mean, dtype=np.float64),
            obs_std=np.array(obs_std, dtype=np.float64),
        )

    @classmethod
    def zeros(cls, hidden_size: int = 256, obs_dim: int = OBS_DIM) -> PolicyParams:
        """All-zero weights, unit statistics: the residual is exactly zero."""
        return cls(
            w1=np.zeros((hidden_size, obs_dim)),
            b1=np.zeros(hidden_size),
            w2=np.zeros((ACTION_DIM, hidden_size)),
            b2=np.zeros(ACTION_DIM),
            obs_mean=np.zeros(obs_dim),
            obs_std=np.ones(obs_dim),
        )

    @classmethod
    def initial(
        cls, rng: np.random.Generator, hidden_size: int = 256, init_std: float = 1.0
    ) -> PolicyParams:
        """
        Training start point: random hidden layer, zero output layer.

        The output layer starts at zero so the initial residual is zero.
        """
        params = cls.zeros(hidden_size)
        w1 = rng.normal(0.0, init_std / math.sqrt(OBS_DIM), (hidden_size, OBS_DIM))
        return PolicyParams(w1, params.b1, params.w2, params.b2, params.obs_mean, params.obs_std)


def forward(params: PolicyParams, obs: FloatArray) -> FloatArray:
    """Raw network output in (-1, 1)."""
    x = (np.asarray(obs, dtype=np.float64) - params.obs_mean) / params.obs_std
    hidden = np.tanh(params.w1 @ x + params.b1)
    return np.asarray(np.tanh(params.w2 @ hidden + params.b2))


def policy_action(
    params: PolicyParams, obs: FloatArray, action_scale: FloatArray
) -> ResidualAction:
    """Forward pass plus scaling."""
    return ResidualAction.from_raw(forward(params, obs), np.asarray(action_scale))


def compose(
    base_cmd: StanceCommand,
    residual: ResidualAction,
    config: StanceAccelConfig | None = None,
    gravity: float = RobotConstants.GRAVITY,
) -> StanceCommand:
    """
    Add the residual to the base command and clip to the command bounds.

    Returns:
        Sum of the six values; clipped is set if a bound was hit.
    """
    cfg = config or StanceAccelConfig()
    return clip_command(base_cmd.as_vector() + residual.scaled, cfg, gravity)


def combine(
    base_cmd: StanceCommand,
    residual: ResidualAction,
    mode: CommandMode,
    config: StanceAccelConfig,
    gravity: float = RobotConstants.GRAVITY,
) -> StanceCommand:
    """
    Combine controller and policy according to the command mode.

    full adds both; controller-only ignores the residual; policy-only uses
    the residual alone.
    """
    if mode == CommandMode.CONTROLLER_ONLY:
        return compose(base_cmd, ResidualAction.zeros(), config, gravity)
    if mode == CommandMode.POLICY_ONLY:
        return compose(StanceCommand.zeros(), residual, config, gravity)
    return compose(base_cmd, residual, config, gravity)


class PolicyCheckpoint(BaseModel):
    """On-disk policy: shapes, row-major weights, statistics and config hash."""

    model_config = ConfigDict(frozen=True)

    version: int = CHECKPOINT_VERSION
    obs_dim: int = Field(gt=0)
    hidden_size: int = Field(gt=0)
    action_dim: int = Field(gt=0)
    weights: list[float]
    obs_mean: list[float]
    obs_std: list[float]
    action_scale: list[float]
    config_hash: str
    iteration: int = 0
    command_mode: CommandMode = CommandMode.FULL

    def to_params(self) -> PolicyParams:
        return PolicyParams.from_flat(
            np.asarray(self.weights),
            np.asarray(self.obs_mean),
            np.asarray(self.obs_std),
            self.hidden_size,
            self.action_dim,
        )


def save_checkpoint(
    path: str | Path, params: PolicyParams, config: LeapConfig, iteration: int = 0
) -> Path:
    """Write params with the episode-config hash as JSON."""
    checkpoint = PolicyCheckpoint(
        obs_dim=params.obs_dim,
        hidden_size=params.hidden_size,
        action_dim=params.action_dim,
        weights=params.flatten().tolist(),
        obs_mean=params.obs_mean.tolist(),
        obs_std=params.obs_std.tolist(),
        action_scale=list(config.policy.action_scale),
        config_hash=config_hash(config),
        iteration=iteration,
        command_mode=config.env.command_mode,
    )
    target = Path(path)
    target.write_text(checkpoint.model_dump_json(), encoding="utf-8")
    logger.info("Wrote checkpoint %s (iteration %d)", target, iteration)
    return target


def load_checkpoint(
    path: str | Path, config: LeapConfig | None = None
) -> tuple[PolicyParams, PolicyCheckpoint]:
    """
    Read a checkpoint, optionally verifying it against a config.

    Raises:
        CheckpointError: If the file is unreadable or malformed.
        ConfigHashMismatchError: If config is given and its hash differs.
    """
    source = Path(path)
    try:
        checkpoint = PolicyCheckpoint.model_validate_json(source.read_text(encoding="utf-8"))
        params = checkpoint.to_params()
    except (OSError, ValidationError, ValueError, json.JSONDecodeError) as e:
        raise CheckpointError(f"Cannot load checkpoint {source}: {e}") from e
    if checkpoint.version != CHECKPOINT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {checkpoint.version}")
    if config is not None:
        expected = config_hash(config)
        if checkpoint.config_hash != expected:
            raise ConfigHashMismatchError(expected, checkpoint.config_hash)
    return params, checkpoint
