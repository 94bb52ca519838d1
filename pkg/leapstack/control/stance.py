"""
Acceleration-based stance controller.

During stance the controller computes the lift-off velocity that realizes
the jump task and tracks it with a time-to-go law

    a_des = (v_liftoff − v) / max(t_remaining, t_floor)

If the lift-off CoM predicted under a_des lies outside the feasibility box
(horizontal half-extent around the current CoM, absolute height band), the
controller instead drives the CoM to a low preparation pose with a
critically damped PD law. Yaw is damped there until the last
yaw_lead_time seconds of stance, then tracks its lift-off rate. Roll and
pitch are never commanded here.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from leapstack.config import StanceAccelConfig
from leapstack.constants import RobotConstants
from leapstack.models.commands import JumpTask, LegSchedule, LiftoffVelocity, StanceCommand
from leapstack.models.state import FloatArray, RigidBodyState

logger = logging.getLogger(__name__)


def liftoff_velocity(task: JumpTask, gravity: float = RobotConstants.GRAVITY) -> LiftoffVelocity:
    """
    Lift-off velocity that lands the task displacement after t_swing.

    Planar and yaw components are displacement / t_swing, with the planar
    part rotated into the world by the start yaw; v_z = ½·g·t_swing.

    Example:
        >>> task = JumpTask((1.0, 0.0, 0.0), np.zeros(3), 0.0, 0.5)
        >>> liftoff_velocity(task)
        LiftoffVelocity(vx=2.0, vy=0.0, vz=2.4525, vyaw=0.0)
    """
    t_swing = task.swing_duration
    planar = task.planar_displacement_world / t_swing
    return LiftoffVelocity(
        vx=float(planar[0]),
        vy=float(planar[1]),
        vz=0.5 * gravity * t_swing,
        vyaw=task.displacement[2] / t_swing,
    )


def command_bounds(
    config: StanceAccelConfig, gravity: float = RobotConstants.GRAVITY
) -> tuple[FloatArray, FloatArray]:
    """
    Lower and upper bounds of the six stance command values.

    Order: a_x, a_y, a_z, yaw acceleration, roll, pitch.
    """
    upper = np.array(
        [
            config.max_linear_accel,
            config.max_linear_accel,
            config.max_up_accel,
            config.max_yaw_accel,
            config.max_tilt,
            config.max_tilt,
        ]
    )
    lower = -upper
    lower[2] = -gravity
    return lower, upper


def clip_command(
    values: FloatArray, config: StanceAccelConfig, gravity: float = RobotConstants.GRAVITY
) -> StanceCommand:
    """Clip six command values to the bounds; flags the result if clipped."""
    lower, upper = command_bounds(config, gravity)
    raw = np.asarray(values, dtype=np.float64)
    clipped = np.clip(raw, lower, upper)
    return StanceCommand.from_vector(clipped, clipped=bool(np.any(clipped != raw)))


def tracking_acceleration(
    v_liftoff: LiftoffVelocity,
    v_current: FloatArray,
    yaw_rate: float,
    t_remaining: float,
    config: StanceAccelConfig,
    gravity: float = RobotConstants.GRAVITY,
) -> tuple[FloatArray, float]:
    """
    Time-to-go acceleration toward the lift-off velocity.

    Args:
        v_liftoff: Target lift-off velocity.
        v_current: Current CoM velocity (world).
        yaw_rate: Current world yaw rate (rad/s).
        t_remaining: Stance time left (s), > 0.
        config: Controller constants (time floor, bounds).
        gravity: Gravity magnitude for the downward bound.

    Returns:
        (linear acceleration, yaw acceleration), clipped to the bounds.
    """
    if t_remaining <= 0.0:
        raise ValueError("t_remaining must be > 0")
    t = max(t_remaining, config.time_floor)
    linear = (v_liftoff.linear - np.asarray(v_current, dtype=np.float64)) / t
    yaw = (v_liftoff.vyaw - yaw_rate) / t
    command = clip_command(np.array([*linear, yaw, 0.0, 0.0]), config, gravity)
    return command.linear_acceleration.copy(), command.yaw_angular_acceleration


def predict_path(
    position: FloatArray, velocity: FloatArray, a_des: FloatArray, t_remaining: float, dt: float
) -> FloatArray:
    """
    CoM positions under constant acceleration, one per integration step.

    Each step advances p by v·h + ½·a·h² and v by a·h, h = dt except for
    a shorter final step.

    Returns:
        (n+1)x3 array starting at the current position.
    """
    if t_remaining < 0.0:
        raise ValueError("t_remaining must be >= 0")
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    p = np.asarray(position, dtype=np.float64).copy()
    v = np.asarray(velocity, dtype=np.float64).copy()
    a = np.asarray(a_des, dtype=np.float64)
    full_steps = math.floor(round(t_remaining / dt, 9))
    remainder = t_remaining - full_steps * dt
    steps = [dt] * full_steps + ([remainder] if remainder > 1e-12 else [])
    path = [p.copy()]
    for h in steps:
        p = p + v * h + 0.5 * a * h * h
        v = v + a * h
        path.append(p.copy())
    return np.asarray(path)


def predict_liftoff_com(
    state: RigidBodyState, a_des: FloatArray, t_remaining: float, dt: float
) -> FloatArray:
    """Predicted CoM position at lift-off under constant a_des."""
    return np.asarray(
        predict_path(state.position, state.linear_velocity, a_des, t_remaining, dt)[-1]
    )


def inside_box(points: FloatArray, center: FloatArray, config: StanceAccelConfig) -> bool:
    """Whether every given point lies inside the feasibility box."""
    pts = np.atleast_2d(points)
    horizontal = np.abs(pts[:, :2] - np.asarray(center)[:2]) <= config.box_half_extent_xy + 1e-12
    vertical = (pts[:, 2] >= config.box_z_min - 1e-12) & (pts[:, 2] <= config.box_z_max + 1e-12)
    return bool(np.all(horizontal) and np.all(vertical))


def preparation_command(
    state: RigidBodyState,
    config: StanceAccelConfig,
    gravity: float = RobotConstants.GRAVITY,
    yaw_acceleration: float | None = None,
) -> StanceCommand:
    """
    PD command toward the low preparation pose at the current x, y.

    a = kp·(p_prep − p) − kd·v. The yaw channel takes ``yaw_acceleration``
    when given and damps the yaw rate (−kd·ω_z) otherwise.
    """
    target = np.array([state.position[0], state.position[1], config.prep_height])
    linear = config.prep_kp * (target - state.position) - config.prep_kd * state.linear_velocity
    if yaw_acceleration is None:
        yaw = -config.prep_kd * float(state.angular_velocity_world[2])
    else:
        yaw = yaw_acceleration
    return clip_command(np.array([*linear, yaw, 0.0, 0.0]), config, gravity)


def select_command(
    state: RigidBodyState,
    task: JumpTask,
    schedule: LegSchedule,
    config: StanceAccelConfig,
    gravity: float = RobotConstants.GRAVITY,
) -> StanceCommand:
    """
    Stance command: lift-off tracking if feasible, else preparation.

    Args:
        state: Current (estimated) state.
        task: Current jump task.
        schedule: Current schedule; must be a stance phase.
        config: Controller constants.
        gravity: Gravity magnitude.

    Returns:
        StanceCommand with roll = pitch = 0.
    """
    if not schedule.in_stance:
        raise ValueError("select_command requires a stance phase")
    target = liftoff_velocity(task, gravity)
    t_remaining = schedule.remaining_phase_time
    a_des, yaw_acc = tracking_acceleration(
        target,
        state.linear_velocity,
        float(state.angular_velocity_world[2]),
        t_remaining,
        config,
        gravity,
    )
    liftoff_com = predict_liftoff_com(state, a_des, t_remaining, config.prediction_dt)
    if inside_box(liftoff_com, state.position, config):
        return StanceCommand(linear_acceleration=a_des, yaw_angular_acceleration=yaw_acc)
    lead = yaw_acc if t_remaining <= config.yaw_lead_time else None
    return preparation_command(state, config, gravity, yaw_acceleration=lead)


def landing_command(
    state: RigidBodyState, config: StanceAccelConfig, gravity: float = RobotConstants.GRAVITY
) -> StanceCommand:
    """
    Command used during a scheduled swing.

    Feet that touched down early absorb the landing with the preparation
    law; with no foot on the ground the linear channels are idle.
    """
    if np.any(state.foot_in_contact):
        return preparation_command(state, config, gravity)
    return StanceCommand.zeros()


class StanceAccelController:
    """Binds the controller constants and gravity."""

    def __init__(self, config: StanceAccelConfig, gravity: float = RobotConstants.GRAVITY) -> None:
        self._config = config
        self._gravity = gravity

    @property
    def config(self) -> StanceAccelConfig:
        return self._config

    def liftoff(self, task: JumpTask) -> LiftoffVelocity:
        return liftoff_velocity(task, self._gravity)

    def command(
        self, state: RigidBodyState, task: JumpTask, schedule: LegSchedule
    ) -> StanceCommand:
        """Base command for the current phase."""
        if schedule.in_stance:
            return select_command(state, task, schedule, self._config, self._gravity)
        return landing_command(state, self._config, self._gravity)

    def clip(self, values: FloatArray) -> StanceCommand:
        return clip_command(values, self._config, self._gravity)
