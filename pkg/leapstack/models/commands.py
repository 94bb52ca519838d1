"""
Command and task types passed between the control layers.

Flow per control tick:
    LegSchedule -> StanceCommand (+ ResidualAction) -> WbcCommand
    -> FootForces -> MotorCommand -> simulator
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Final

import numpy as np
from scipy.spatial.transform import Rotation

from leapstack.models.state import FloatArray, _vec

ACTION_DIM: Final[int] = 6
"""Residual/stance command size: a_x, a_y, a_z, yaw accel, roll, pitch."""


@dataclass(frozen=True)
class LegSchedule:
    """
    Desired contact pattern at one instant of the pronking cycle.

    Attributes:
        desired_contact: ĉ_i for each leg; all equal for pronking.
        phase_fraction: Progress through the current phase, in [0, 1).
        remaining_phase_time: Time left in the current phase (s).
        cycle_index: Completed jump cycles before this instant.
        stance_duration: Stance phase length (s).
        swing_duration: Swing phase length (s).
    """

    desired_contact: tuple[bool, bool, bool, bool]
    phase_fraction: float
    remaining_phase_time: float
    cycle_index: int
    stance_duration: float
    swing_duration: float

    @property
    def in_stance(self) -> bool:
        return self.desired_contact[0]

    @property
    def cycle_duration(self) -> float:
        return self.stance_duration + self.swing_duration

    @property
    def remaining_cycle_time(self) -> float:
        """Time left until the next cycle boundary (s)."""
        if self.in_stance:
            return self.remaining_phase_time + self.swing_duration
        return self.remaining_phase_time

    @property
    def swing_phase(self) -> float:
        """Swing progress in [0, 1]; 0 during stance."""
        return 0.0 if self.in_stance else self.phase_fraction


@dataclass(frozen=True, eq=False)
class JumpTask:
    """
    One jump: a landing displacement relative to the pose at jump start.

    Attributes:
        displacement: (p_x, p_y, p_yaw) in the start heading frame.
        start_position: CoM position recorded at jump start (world).
        start_yaw: Heading recorded at jump start (rad).
        swing_duration: Planned flight time (s).

    Example:
        >>> task = JumpTask((1.0, 0.0, 0.0), np.zeros(3), math.pi / 2, 0.5)
        >>> np.round(task.target_position, 6).tolist()
        [0.0, 1.0, 0.0]
    """

    displacement: tuple[float, float, float]
    start_position: FloatArray
    start_yaw: float
    swing_duration: float

    def __post_init__(self) -> None:
        if self.swing_duration <= 0.0:
            raise ValueError("swing_duration must be > 0")
        object.__setattr__(self, "start_position", _vec(self.start_position, (3,)))

    @property
    def planar_displacement_world(self) -> FloatArray:
        """(p_x, p_y, 0) rotated into the world frame by start_yaw."""
        px, py, _ = self.displacement
        return np.asarray(Rotation.from_euler("z", self.start_yaw).apply([px, py, 0.0]))

    @property
    def target_position(self) -> FloatArray:
        """Desired landing position (z copied from the start)."""
        return np.asarray(self.start_position + self.planar_displacement_world)

    @property
    def target_yaw(self) -> float:
        return self.start_yaw + self.displacement[2]

    @property
    def planar_distance(self) -> float:
        """Commanded planar jump distance d_total (m)."""
        return math.hypot(self.displacement[0], self.displacement[1])


@dataclass(frozen=True)
class LiftoffVelocity:
    """
    Desired base velocity at the instant all feet leave the ground.

    Planar components are in the world frame.
    """

    vx: float
    vy: float
    vz: float
    vyaw: float

    def __post_init__(self) -> None:
        if self.vz <= 0.0:
            raise ValueError("lift-off vertical velocity must be > 0")

    @property
    def linear(self) -> FloatArray:
        return np.array([self.vx, self.vy, self.vz])

    @property
    def planar(self) -> FloatArray:
        """(v_x, v_y, 0), used as the swing controller's desired velocity."""
        return np.array([self.vx, self.vy, 0.0])


@dataclass(frozen=True, eq=False)
class StanceCommand:
    """
    Six-value command of the acceleration controller and residual policy.

    Attributes:
        linear_acceleration: Desired CoM acceleration, world frame (m/s²).
        yaw_angular_acceleration: Desired yaw acceleration (rad/s²).
        roll: Desired body roll (rad).
        pitch: Desired body pitch (rad).
        clipped: Whether a bound clipped any component.
    """

    linear_acceleration: FloatArray
    yaw_angular_acceleration: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    clipped: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "linear_acceleration", _vec(self.linear_acceleration, (3,))
        )

    @classmethod
    def zeros(cls) -> StanceCommand:
        return cls(linear_acceleration=np.zeros(3))

    @classmethod
    def from_vector(cls, values: FloatArray, *, clipped: bool = False) -> StanceCommand:
        """Build from (a_x, a_y, a_z, yaw accel, roll, pitch)."""
        v = np.asarray(values, dtype=np.float64)
        return cls(
            linear_acceleration=v[:3],
            yaw_angular_acceleration=float(v[3]),
            roll=float(v[4]),
            pitch=float(v[5]),
            clipped=clipped,
        )

    def as_vector(self) -> FloatArray:
        return np.array(
            [
                *self.linear_acceleration,
                self.yaw_angular_acceleration,
                self.roll,
                self.pitch,
            ]
        )


@dataclass(frozen=True, eq=False)
class ResidualAction:
    """
    Policy output: raw values in [-1, 1] and their physical scaling.

    scaled = raw * action_scale, ordered like StanceCommand.as_vector().
    """

    raw: FloatArray
    scaled: FloatArray

    def __post_init__(self) -> None:
        object.__setattr__(self, "raw", _vec(self.raw, (ACTION_DIM,)))
        object.__setattr__(self, "scaled", _vec(self.scaled, (ACTION_DIM,)))

    @classmethod
    def from_raw(cls, raw: FloatArray, action_scale: FloatArray) -> ResidualAction:
        """Clip raw to [-1, 1] and scale."""
        clipped = np.clip(np.asarray(raw, dtype=np.float64), -1.0, 1.0)
        return cls(raw=clipped, scaled=clipped * np.asarray(action_scale, dtype=np.float64))

    @classmethod
    def zeros(cls) -> ResidualAction:
        return cls(raw=np.zeros(ACTION_DIM), scaled=np.zeros(ACTION_DIM))


@dataclass(frozen=True, eq=False)
class WbcCommand:
    """
    18-value base command plus swing-foot targets.

    Pose is (x, y, z, roll, pitch, yaw); velocity and acceleration are
    (linear world xyz, angular xyz).
    """

    base_pose_des: FloatArray
    base_velocity_des: FloatArray
    base_acceleration_des: FloatArray
    desired_contact: tuple[bool, bool, bool, bool]
    swing_foot_targets: dict[int, FloatArray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "base_pose_des", _vec(self.base_pose_des, (6,)))
        object.__setattr__(self, "base_velocity_des", _vec(self.base_velocity_des, (6,)))
        object.__setattr__(
            self, "base_acceleration_des", _vec(self.base_acceleration_des, (6,))
        )
        targets = {int(k): _vec(v, (3,)) for k, v in self.swing_foot_targets.items()}
        object.__setattr__(self, "swing_foot_targets", targets)

    @property
    def rotation_des(self) -> Rotation:
        """Desired orientation from (roll, pitch, yaw)."""
        return Rotation.from_euler("xyz", self.base_pose_des[3:])

    @property
    def linear_acceleration(self) -> FloatArray:
        return self.base_acceleration_des[:3]

    @property
    def angular_acceleration(self) -> FloatArray:
        return self.base_acceleration_des[3:]

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.base_pose_des))
            and np.all(np.isfinite(self.base_velocity_des))
            and np.all(np.isfinite(self.base_acceleration_des))
        )


@dataclass(frozen=True, eq=False)
class MotorCommand:
    """
    Per-motor impedance command τ = kp(q̄ − q) + kd(q̇̄ − q̇) + τ̄.

    Arrays are 4x3 (leg, joint).
    """

    q_des: FloatArray
    qdot_des: FloatArray
    tau_ff: FloatArray
    kp: float
    kd: float
    torque_saturated: bool = False
    ik_clipped: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "q_des", _vec(self.q_des, (4, 3)))
        object.__setattr__(self, "qdot_des", _vec(self.qdot_des, (4, 3)))
        object.__setattr__(self, "tau_ff", _vec(self.tau_ff, (4, 3)))
