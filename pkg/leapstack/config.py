"""
Configuration models and the TOML config file format.

One immutable Pydantic model per block (robot, sim, gait, swing,
stance_accel, wbc, estimator, policy, env, ars). Every field carries a
default, so a partial file resolves to a complete configuration; the
resolved snapshot can be written back out and fully determines a run.

Example:
    >>> cfg = parse_config_text("[env]\\nw_o = 2.0\\n")
    >>> cfg.env.w_o
    2.0
    >>> cfg.env.w_p
    1.0
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import tomllib
from enum import StrEnum
from pathlib import Path
from typing import Any

import numpy as np
import tomli_w
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from leapstack.constants import RobotConstants
from leapstack.exceptions import ConfigError
from leapstack.models.state import LegGeometry, RobotModel

logger = logging.getLogger(__name__)

Vec3 = tuple[float, float, float]


class _Block(BaseModel):
    """Base for config blocks: frozen, unknown keys rejected."""

    model_config = ConfigDict(frozen=True, extra="forbid")


class RobotConfig(_Block):
    """Rigid-body and leg geometry of the simulated robot."""

    mass: float = Field(default=15.0, gt=0.0, description="Body mass in kg")
    inertia: tuple[Vec3, Vec3, Vec3] = (
        (0.08, 0.0, 0.0),
        (0.0, 0.22, 0.0),
        (0.0, 0.0, 0.26),
    )
    hip_offsets: tuple[Vec3, Vec3, Vec3, Vec3] = (
        (0.1881, -0.04675, 0.0),
        (0.1881, 0.04675, 0.0),
        (-0.1881, -0.04675, 0.0),
        (-0.1881, 0.04675, 0.0),
    )
    abduction_offset: float = Field(default=0.08, ge=0.0)
    thigh_length: float = Field(default=0.213, gt=0.0)
    calf_length: float = Field(default=0.213, gt=0.0)
    friction_coefficient: float = Field(default=0.6, gt=0.0)
    max_normal_force: float = Field(default=500.0, gt=0.0, description="Per-foot f_z cap in N")
    gravity: float = Field(default=RobotConstants.GRAVITY, gt=0.0)
    nominal_height: float = Field(default=0.27, gt=0.0)

    @field_validator("inertia")
    @classmethod
    def validate_inertia(cls, v: tuple[Vec3, Vec3, Vec3]) -> tuple[Vec3, Vec3, Vec3]:
        """Inertia must be symmetric positive definite."""
        matrix = np.asarray(v, dtype=float)
        if not np.allclose(matrix, matrix.T, atol=1e-12):
            raise ValueError("inertia must be symmetric")
        if np.min(np.linalg.eigvalsh(matrix)) <= 0.0:
            raise ValueError("inertia must be positive definite")
        return v


class SimConfig(_Block):
    """Integrator and contact-model parameters."""

    dt: float = Field(default=RobotConstants.CONTROL_DT, gt=0.0)
    touchdown_tolerance: float = Field(default=0.01, ge=0.0)
    leg_reach: float = Field(default=0.40, gt=0.0, description="Swing-foot reach sphere radius")
    liftoff_speed: float = Field(
        default=0.1, ge=0.0, description="Upward base speed needed to release a stance foot"
    )


class GaitConfig(_Block):
    """Pronking contact schedule."""

    stance_duration: float = Field(default=0.5, gt=0.0)
    swing_duration: float = Field(default=0.5, gt=0.0)


class RaibertVelocitySource(StrEnum):
    """Desired velocity fed to the Raibert feedback term."""

    LIFTOFF = "liftoff"
    ZERO = "zero"


class SwingConfig(_Block):
    """Swing-leg controller gains."""

    raibert_gain: float = Field(default=0.03, ge=0.0, description="Velocity feedback gain in s")
    apex_height: float = Field(default=0.05, ge=0.0)
    max_landing_offset: float = Field(
        default=0.2, gt=0.0, description="Landing target radius around the neutral foothold"
    )
    desired_velocity: RaibertVelocitySource = RaibertVelocitySource.LIFTOFF


class StanceAccelConfig(_Block):
    """Acceleration controller constants."""

    box_half_extent_xy: float = Field(default=0.15, gt=0.0)
    box_z_min: float = 0.12
    box_z_max: float = 0.32
    time_floor: float = Field(default=0.02, gt=0.0)
    prediction_dt: float = Field(default=RobotConstants.CONTROL_DT, gt=0.0)
    prep_height: float = 0.16
    prep_kp: float = Field(default=100.0, ge=0.0)
    prep_kd: float = Field(default=20.0, ge=0.0)
    yaw_lead_time: float = Field(
        default=0.25,
        ge=0.0,
        description="Stance time before lift-off from which a preparing base tracks its yaw rate",
    )
    max_linear_accel: float = Field(default=40.0, gt=0.0)
    max_up_accel: float = Field(default=40.0, gt=0.0)
    max_yaw_accel: float = Field(default=40.0, gt=0.0)
    max_tilt: float = Field(default=0.5, gt=0.0, description="Roll/pitch command bound in rad")

    @model_validator(mode="after")
    def validate_box(self) -> StanceAccelConfig:
        """Feasibility box must be non-empty."""
        if self.box_z_min >= self.box_z_max:
            raise ValueError("box_z_min must be below box_z_max")
        return self


class WbcConfig(_Block):
    """Whole-body controller: force QP and joint impedance."""

    max_iterations: int = Field(default=200, ge=1)
    regularization: float = Field(default=1e-3, gt=0.0)
    wrench_weights: tuple[float, float, float, float, float, float] = (
        1.0, 1.0, 1.0, 10.0, 10.0, 10.0,
    )
    tolerance: float = Field(default=1e-6, gt=0.0)
    polish_rounds: int = Field(default=8, ge=0)
    kp: float = Field(default=30.0, ge=0.0)
    kd: float = Field(default=1.0, ge=0.0)
    torque_limit: float = Field(default=35.0, gt=0.0)
    ik_damping: float = Field(default=1e-4, ge=0.0)


class EstimatorConfig(_Block):
    """Kalman filter noise model."""

    inject_noise: bool = False
    accel_std: float = Field(default=0.1, ge=0.0)
    foot_std: float = Field(default=0.01, ge=0.0)
    orientation_std: float = Field(default=0.0, ge=0.0)
    gyro_std: float = Field(default=0.0, ge=0.0)
    initial_std: float = Field(default=1e-3, gt=0.0)


class PolicyConfig(_Block):
    """Residual policy shape and action scaling."""

    hidden_size: int = Field(default=256, ge=1)
    action_scale: tuple[float, float, float, float, float, float] = (
        5.0, 5.0, 5.0, 10.0, 0.3, 0.3,
    )
    policy_dt: float = Field(default=0.02, gt=0.0, description="Policy period; 0.002 for 500 Hz")
    act_in_swing: bool = True
    init_std: float = Field(default=1.0, ge=0.0, description="Hidden-layer weight scale")


class CommandMode(StrEnum):
    """How the residual combines with the acceleration controller."""

    FULL = "full"
    CONTROLLER_ONLY = "controller-only"
    POLICY_ONLY = "policy-only"


class EnvConfig(_Block):
    """Jump task sequence, reward weights and termination thresholds."""

    jump_sequence: tuple[Vec3, ...] = (
        (0.0, 0.0, 0.0),
        (1.0, 0.0, 0.0),
        (-0.5, 0.0, 0.0),
        (0.0, 0.2, 0.0),
        (0.0, -0.2, 0.0),
    )
    alive_bonus: float = 4.0
    w_p: float = 1.0
    w_o: float = 5.0
    w_c: float = 0.4
    distance_floor: float = Field(default=0.1, gt=0.0)
    min_height: float = 0.08
    min_upright: float = 0.6
    body_box: Vec3 = (0.38, 0.29, 0.11)
    command_mode: CommandMode = CommandMode.FULL

    @field_validator("jump_sequence")
    @classmethod
    def validate_sequence(cls, v: tuple[Vec3, ...]) -> tuple[Vec3, ...]:
        """At least one jump is required."""
        if not v:
            raise ValueError("jump_sequence must not be empty")
        return v

    @property
    def max_jumps(self) -> int:
        """Number of jumps per episode."""
        return len(self.jump_sequence)


class ArsConfig(_Block):
    """Augmented Random Search hyperparameters."""

    num_directions: int = Field(default=32, ge=1)
    top_directions: int = Field(default=16, ge=1)
    step_size: float = Field(default=0.015, gt=0.0)
    exploration_std: float = Field(default=0.02, gt=0.0)
    iterations: int = Field(default=300, ge=0)
    eval_interval: int = Field(default=10, ge=1)
    eval_episodes: int = Field(default=5, ge=1)
    seed: int = 0
    rollout_workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def validate_top(self) -> ArsConfig:
        """1 <= b <= N."""
        if self.top_directions > self.num_directions:
            raise ValueError("top_directions must not exceed num_directions")
        return self


class LeapConfig(_Block):
    """Complete resolved configuration."""

    robot: RobotConfig = RobotConfig()
    sim: SimConfig = SimConfig()
    gait: GaitConfig = GaitConfig()
    swing: SwingConfig = SwingConfig()
    stance_accel: StanceAccelConfig = StanceAccelConfig()
    wbc: WbcConfig = WbcConfig()
    estimator: EstimatorConfig = EstimatorConfig()
    policy: PolicyConfig = PolicyConfig()
    env: EnvConfig = EnvConfig()
    ars: ArsConfig = ArsConfig()

    @property
    def policy_decimation(self) -> int:
        """Simulator substeps per policy tick."""
        return max(1, round(self.policy.policy_dt / self.sim.dt))


def robot_model(config: RobotConfig) -> RobotModel:
    """Build the simulator/controller robot description from its config block."""
    return RobotModel(
        mass=config.mass,
        inertia=np.asarray(config.inertia, dtype=np.float64),
        hip_offsets=np.asarray(config.hip_offsets, dtype=np.float64),
        geometry=LegGeometry(
            abduction_offset=config.abduction_offset,
            thigh_length=config.thigh_length,
            calf_length=config.calf_length,
        ),
        friction_coefficient=config.friction_coefficient,
        max_normal_force=config.max_normal_force,
        gravity=config.gravity,
        nominal_height=config.nominal_height,
    )


EPISODE_BLOCKS: tuple[str, ...] = (
    "robot", "sim", "gait", "swing", "stance_accel", "wbc", "estimator", "policy", "env",
)
"""Blocks that shape an episode; the ars block is excluded from the config hash."""


def config_hash(config: LeapConfig) -> str:
    """
    Hash the episode-shaping part of a configuration.

    Args:
        config: Resolved configuration.

    Returns:
        Hex SHA-256 digest of the canonical JSON of the episode blocks.
    """
    payload = config.model_dump(mode="json", include=set(EPISODE_BLOCKS))
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _find_line(text: str, key: str) -> int | None:
    """Best-effort 1-based line number of ``key = ...`` in the TOML source."""
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for number, line in enumerate(text.splitlines(), start=1):
        if pattern.match(line):
            return number
    return None


def _toml_line(error: tomllib.TOMLDecodeError) -> int | None:
    match = re.search(r"line (\d+)", str(error))
    return int(match.group(1)) if match else None


def parse_config_text(text: str, path: str | None = None) -> LeapConfig:
    """
    Parse and validate TOML config text.

    Args:
        text: TOML document; missing keys resolve to defaults.
        path: Source path for diagnostics.

    Returns:
        Resolved LeapConfig.

    Raises:
        ConfigError: On TOML syntax errors (with line) or validation
            errors (with dotted field path and best-effort line).
    """
    try:
        raw: dict[str, Any] = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Malformed config: {e}", line=_toml_line(e), path=path) from e

    try:
        return LeapConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        loc = [str(part) for part in first["loc"]]
        field = ".".join(loc)
        leaf = next((part for part in reversed(loc) if not part.isdigit()), None)
        line = _find_line(text, leaf) if leaf else None
        raise ConfigError(
            f"Invalid value for {field}: {first['msg']}", field=field, line=line, path=path
        ) from e


def load_config(path: str | Path | None = None) -> LeapConfig:
    """
    Load a config file, or return defaults when path is None.

    Raises:
        ConfigError: If the file cannot be read, parsed or validated.
    """
    if path is None:
        return LeapConfig()
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config: {e}", path=str(source)) from e
    config = parse_config_text(text, path=str(source))
    logger.debug("Loaded config %s (hash %s)", source, config_hash(config)[:12])
    return config


def dump_config(config: LeapConfig) -> str:
    """Render the resolved configuration as TOML."""
    return tomli_w.dumps(config.model_dump(mode="json"))


def write_config(config: LeapConfig, path: str | Path) -> None:
    """Write the resolved-config snapshot."""
    Path(path).write_text(dump_config(config), encoding="utf-8")
