"""
Jumping environment.

One environment step is one policy tick. Inside it the control stack runs
at the simulator rate:

    gait -> stance controller (+ residual) -> swing targets -> WBC
    -> simulator -> state estimator

The controllers only see the estimated state; reward and termination use
the simulator's state. A new jump task is recorded at every cycle boundary
from the estimated pose, and the episode ends after the last jump of the
sequence (truncated) or when a termination condition fires (terminated).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum
from itertools import product
from typing import Any

import gymnasium as gym
import numpy as np
from gymnasium import spaces
from pydantic import BaseModel, ConfigDict

from leapstack.config import EnvConfig, LeapConfig, robot_model
from leapstack.constants import LEG_NAMES
from leapstack.control.estimator import BaseStateEstimator
from leapstack.control.gait import PronkingGait
from leapstack.control.stance import StanceAccelController
from leapstack.control.swing import SwingController
from leapstack.control.wbc import WbcOutput, WholeBodyController
from leapstack.exceptions import EpisodeFinishedError, NonFiniteStateError
from leapstack.learning.policy import OBS_DIM, combine, observe
from leapstack.models.commands import (
    ACTION_DIM,
    JumpTask,
    LegSchedule,
    LiftoffVelocity,
    ResidualAction,
)
from leapstack.models.state import BoolArray, FloatArray, RigidBodyState
from leapstack.sim.rigid_body import Simulator, StepResult
from leapstack.sim.trajectory import TrajectoryLog

logger = logging.getLogger(__name__)


class TerminationReason(StrEnum):
    """Why an episode terminated early."""

    HEIGHT = "height"
    """Base below the minimum height."""

    ORIENTATION = "orientation"
    """Body up vector too far from vertical."""

    BODY_CONTACT = "body_contact"
    """A corner of the base box went below the ground."""

    NON_FINITE = "non_finite"
    """The simulation produced NaN or Inf."""


@dataclass(frozen=True)
class RewardTerms:
    """
    Per-tick reward decomposition.

    Attributes:
        alive: Alive bonus.
        position: Normalized squared planar landing-target distance, <= 0.
        orientation: −(roll² + pitch²), <= 0.
        contact: −(number of feet whose contact differs from the schedule).
        total: alive + w_p·position + w_o·orientation + w_c·contact.
    """

    alive: float
    position: float
    orientation: float
    contact: float
    total: float


def compute_reward(
    state: RigidBodyState,
    task: JumpTask,
    schedule: LegSchedule,
    contacts: BoolArray | None = None,
    config: EnvConfig | None = None,
) -> RewardTerms:
    """
    Reward of one tick.

    Args:
        state: True state.
        task: Current jump task.
        schedule: Desired contacts at state.time.
        contacts: Actual contacts; defaults to state.foot_in_contact.
        config: Weights and distance floor.

    Example:
        >>> compute_reward(stand, in_place_task, schedule_at(0.0)).total
        4.0
    """
    cfg = config or EnvConfig()
    actual = state.foot_in_contact if contacts is None else np.asarray(contacts, dtype=bool)
    error = state.position[:2] - task.target_position[:2]
    scale = max(task.planar_distance, cfg.distance_floor)
    position = -float(error @ error) / (scale * scale)
    roll, pitch, _ = state.rpy
    orientation = -float(roll * roll + pitch * pitch)
    mismatched = sum(bool(actual[leg]) != schedule.desired_contact[leg] for leg in range(4))
    contact = -float(mismatched)
    total = (
        cfg.alive_bonus + cfg.w_p * position + cfg.w_o * orientation + cfg.w_c * contact
    )
    return RewardTerms(
        alive=cfg.alive_bonus,
        position=position,
        orientation=orientation,
        contact=contact,
        total=total,
    )


def body_corners(state: RigidBodyState, body_box: tuple[float, float, float]) -> FloatArray:
    """World positions of the eight base-box corners (8x3)."""
    half = np.asarray(body_box, dtype=np.float64) / 2.0
    corners = np.array([half * np.array(signs) for signs in product((-1.0, 1.0), repeat=3)])
    return np.asarray(state.position + corners @ state.rotation_matrix.T)


def check_termination(
    state: RigidBodyState, config: EnvConfig | None = None
) -> tuple[bool, TerminationReason | None]:
    """
    Early-termination test.

    Returns:
        (terminate, reason); reason is None when the episode continues.
    """
    cfg = config or EnvConfig()
    if state.position[2] < cfg.min_height:
        return True, TerminationReason.HEIGHT
    if float(state.up_vector[2]) < cfg.min_upright:
        return True, TerminationReason.ORIENTATION
    if float(np.min(body_corners(state, cfg.body_box)[:, 2])) < 0.0:
        return True, TerminationReason.BODY_CONTACT
    return False, None


class EpisodeSummary(BaseModel):
    """Per-episode statistics written next to rollout trajectories."""

    model_config = ConfigDict(frozen=True)

    episode_return: float
    policy_steps: int
    duration: float
    jumps_completed: int
    terminated: bool
    termination_reason: TerminationReason | None = None
    flight_times: list[float]
    landing_errors: list[float]
    yaw_progress: list[float]
    peak_yaw_rate: float

    @property
    def mean_flight_time(self) -> float:
        return float(np.mean(self.flight_times)) if self.flight_times else 0.0


def _wrap(angle: float) -> float:
    return math.atan2(math.sin(angle), math.cos(angle))


class JumpEnv(gym.Env[FloatArray, FloatArray]):
    """
    Multi-jump pronking episode with a residual stance-command action.

    Args:
        config: Full configuration; the env, gait and controller blocks
            shape the episode.
        record: Keep a simulator-rate TrajectoryLog of the episode.

    Example:
        >>> env = JumpEnv(LeapConfig())
        >>> obs, info = env.reset(seed=0)
        >>> obs, reward, terminated, truncated, info = env.step(np.zeros(6))
    """

    metadata: dict[str, Any] = {"render_modes": []}

    def __init__(self, config: LeapConfig | None = None, record: bool = False) -> None:
        super().__init__()
        self._config = config or LeapConfig()
        cfg = self._config
        self._model = robot_model(cfg.robot)
        self._sim = Simulator(
            self._model,
            dt=cfg.sim.dt,
            touchdown_tolerance=cfg.sim.touchdown_tolerance,
            leg_reach=cfg.sim.leg_reach,
            liftoff_speed=cfg.sim.liftoff_speed,
        )
        self._gait = PronkingGait(cfg.gait.stance_duration, cfg.gait.swing_duration)
        self._stance = StanceAccelController(cfg.stance_accel, cfg.robot.gravity)
        self._swing = SwingController(cfg.swing, self._model, cfg.gait.stance_duration)
        self._wbc = WholeBodyController(self._model, cfg.wbc)
        self._estimator = BaseStateEstimator(cfg.estimator, dt=cfg.sim.dt)
        self._decimation = cfg.policy_decimation
        self._action_scale = np.asarray(cfg.policy.action_scale, dtype=np.float64)
        self._record = record

        self.observation_space = spaces.Box(-np.inf, np.inf, shape=(OBS_DIM,), dtype=np.float64)
        self.action_space = spaces.Box(-1.0, 1.0, shape=(ACTION_DIM,), dtype=np.float64)

        self._state = RigidBodyState.nominal_stand(self._model)
        self._estimate = self._state
        self._task: JumpTask | None = None
        self._liftoff: LiftoffVelocity | None = None
        self._liftoff_feet = np.array(self._state.foot_positions)
        self._jump_index = 0
        self._done = True
        self._reason: TerminationReason | None = None
        self._return = 0.0
        self._steps = 0
        self._flight_times: list[float] = []
        self._landing_errors: list[float] = []
        self._yaw_progress: list[float] = []
        self._flight_start: float | None = None
        self._cycle_flight = 0.0
        self._peak_yaw_rate = 0.0
        self._last_reward: RewardTerms | None = None
        self._last_wbc: WbcOutput | None = None
        self.trajectory: TrajectoryLog | None = None

    @property
    def config(self) -> LeapConfig:
        return self._config

    @property
    def state(self) -> RigidBodyState:
        """True simulator state."""
        return self._state

    @property
    def estimate(self) -> RigidBodyState:
        """State as seen by the controllers."""
        return self._estimate

    @property
    def task(self) -> JumpTask:
        if self._task is None:
            raise EpisodeFinishedError("Environment not reset")
        return self._task

    @property
    def done(self) -> bool:
        return self._done

    @property
    def max_jumps(self) -> int:
        return self._config.env.max_jumps

    def clone(self) -> JumpEnv:
        """Fresh environment with the same configuration."""
        return JumpEnv(self._config, record=self._record)

    def reset(
        self, *, seed: int | None = None, options: dict[str, Any] | None = None
    ) -> tuple[FloatArray, dict[str, Any]]:
        """
        Start an episode at the nominal stand with the first task recorded.

        Returns:
            (observation, info)
        """
        super().reset(seed=seed)
        self._state = RigidBodyState.nominal_stand(self._model)
        self._estimate = self._estimator.reset(self._state, seed=0 if seed is None else seed)
        self._liftoff_feet = np.array(self._state.foot_positions)
        self._jump_index = 0
        self._done = False
        self._reason = None
        self._return = 0.0
        self._steps = 0
        self._flight_times = []
        self._landing_errors = []
        self._yaw_progress = []
        self._flight_start = None
        self._cycle_flight = 0.0
        self._peak_yaw_rate = 0.0
        self._last_reward = None
        self._last_wbc = None
        self.trajectory = TrajectoryLog() if self._record else None
        self._start_jump()
        logger.debug("Episode reset (seed=%s)", seed)
        return self._observation(), self._info()

    def set_state(self, state: RigidBodyState) -> None:
        """Replace the true state mid-episode; the estimator restarts from it."""
        self._state = state
        self._estimate = self._estimator.reset(state)

    def step(
        self, action: FloatArray | ResidualAction
    ) -> tuple[FloatArray, float, bool, bool, dict[str, Any]]:
        """
        Run one policy tick.

        Args:
            action: Raw residual in [-1, 1]^6 (clipped) or a ResidualAction.

        Returns:
            (observation, reward, terminated, truncated, info)

        Raises:
            EpisodeFinishedError: If the episode already ended.
        """
        if self._done:
            raise EpisodeFinishedError("step() called after the episode ended; call reset()")
        residual = (
            action
            if isinstance(action, ResidualAction)
            else ResidualAction.from_raw(np.asarray(action, dtype=np.float64), self._action_scale)
        )

        terminated, self._reason = check_termination(self._state, self._config.env)
        truncated = False
        if not terminated:
            for _ in range(self._decimation):
                try:
                    self._substep(residual)
                except NonFiniteStateError as e:
                    logger.warning("Episode ended on non-finite state: %s", e)
                    terminated, self._reason = True, TerminationReason.NON_FINITE
                    break
                terminated, self._reason = check_termination(self._state, self._config.env)
                if terminated:
                    break
                if self._advance_jump():
                    truncated = True
                    break

        reward = self._reward()
        self._return += reward.total
        self._steps += 1
        self._done = terminated or truncated
        if terminated:
            self._close_flight(self._state.time)
            logger.info(
                "Episode terminated (%s) at t=%.3f after %d jumps",
                self._reason,
                self._state.time,
                self._jump_index,
            )
        return self._observation(), reward.total, terminated, truncated, self._info(reward)

    def summary(self) -> EpisodeSummary:
        return EpisodeSummary(
            episode_return=self._return,
            policy_steps=self._steps,
            duration=self._state.time,
            jumps_completed=len(self._landing_errors),
            terminated=self._reason is not None,
            termination_reason=self._reason,
            flight_times=list(self._flight_times),
            landing_errors=list(self._landing_errors),
            yaw_progress=list(self._yaw_progress),
            peak_yaw_rate=self._peak_yaw_rate,
        )

    def _schedule(self) -> LegSchedule:
        return self._gait.at(self._state.time)

    def _start_jump(self) -> None:
        est = self._estimate
        displacement = self._config.env.jump_sequence[self._jump_index]
        self._task = JumpTask(
            displacement=displacement,
            start_position=est.position,
            start_yaw=est.yaw,
            swing_duration=self._gait.swing_duration,
        )
        self._liftoff = self._stance.liftoff(self._task)
        self._cycle_flight = 0.0
        logger.debug("Jump %d: displacement %s", self._jump_index, displacement)

    def _advance_jump(self) -> bool:
        """Handle a cycle boundary; returns True once the sequence is finished."""
        if self._schedule().cycle_index <= self._jump_index:
            return False
        task = self.task
        truth = self._state
        self._close_flight(truth.time)
        error = truth.position[:2] - task.target_position[:2]
        self._landing_errors.append(float(np.linalg.norm(error)))
        self._yaw_progress.append(_wrap(truth.yaw - task.start_yaw))
        self._flight_times.append(self._cycle_flight)
        self._jump_index += 1
        if self._jump_index >= self.max_jumps:
            logger.info(
                "Episode complete: %d jumps, return %.3f", self._jump_index, self._return
            )
            return True
        self._start_jump()
        return False

    def _close_flight(self, time: float) -> None:
        if self._flight_start is not None:
            self._cycle_flight = max(self._cycle_flight, time - self._flight_start)
            self._flight_start = None

    def _substep(self, residual: ResidualAction) -> None:
        cfg = self._config
        truth = self._state
        est = self._estimate
        schedule = self._schedule()
        task = self.task

        base = self._stance.command(est, task, schedule)
        if not schedule.in_stance:
            residual = self._swing_residual(residual)
        command = combine(
            base, residual, cfg.env.command_mode, cfg.stance_accel, cfg.robot.gravity
        )
        targets = self._swing.targets(est, schedule, self._liftoff_feet, self._liftoff)
        output = self._wbc.compute(command, est, targets, schedule.desired_contact)
        result = self._sim.step_motor(
            truth, output.motor, targets, schedule, cfg.wbc.torque_limit
        )

        for leg in np.flatnonzero(result.released):
            self._liftoff_feet[leg] = truth.foot_positions[leg]
        self._state = result.state
        self._estimate = self._estimator.step(result.state, result.linear_acceleration)
        self._last_wbc = output
        self._track_flight(result)
        if self.trajectory is not None:
            self._log(result, output, schedule)

    def _swing_residual(self, residual: ResidualAction) -> ResidualAction:
        """Residual during swing: attitude and yaw channels only, if enabled."""
        if not self._config.policy.act_in_swing:
            return ResidualAction.zeros()
        mask = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
        return ResidualAction(raw=residual.raw * mask, scaled=residual.scaled * mask)

    def _track_flight(self, result: StepResult) -> None:
        state = result.state
        airborne = not np.any(state.foot_in_contact)
        if airborne and self._flight_start is None:
            self._flight_start = state.time
        elif not airborne:
            self._close_flight(state.time)
        self._peak_yaw_rate = max(
            self._peak_yaw_rate, abs(float(state.angular_velocity_world[2]))
        )

    def _reward(self) -> RewardTerms:
        reward = compute_reward(
            self._state, self.task, self._schedule(), config=self._config.env
        )
        self._last_reward = reward
        return reward

    def _observation(self) -> FloatArray:
        return observe(self._estimate, self.task, self._schedule()).as_vector()

    def _info(self, reward: RewardTerms | None = None) -> dict[str, Any]:
        return {
            "time": self._state.time,
            "jump_index": self._jump_index,
            "jumps_completed": len(self._landing_errors),
            "reason": self._reason,
            "reward_terms": reward,
        }

    def _log(self, result: StepResult, output: WbcOutput, schedule: LegSchedule) -> None:
        assert self.trajectory is not None
        task = self.task
        pos_err, vel_err = self._estimator.errors(result.state)
        reward = compute_reward(result.state, task, schedule, config=self._config.env)
        target = task.target_position
        self.trajectory.append(
            result.state,
            result.wrench,
            **{
                f"desired_contact_{name}": float(c)
                for name, c in zip(LEG_NAMES, schedule.desired_contact, strict=True)
            },
            qp_iterations=output.distribution.iterations,
            qp_residual=output.distribution.residual,
            est_pos_err=pos_err,
            est_vel_err=vel_err,
            reward_total=reward.total,
            reward_position=reward.position,
            reward_orientation=reward.orientation,
            reward_contact=reward.contact,
            target_x=float(target[0]),
            target_y=float(target[1]),
            target_yaw=task.target_yaw,
        )


Policy = Callable[[FloatArray], FloatArray | ResidualAction]
"""Maps an observation vector to a raw residual or a ResidualAction."""


def run_episode(
    env: JumpEnv, policy: Policy | None = None, seed: int | None = None
) -> tuple[EpisodeSummary, FloatArray]:
    """
    Roll out one full episode.

    Args:
        env: Environment (reset here).
        policy: Action source; None applies a zero residual.
        seed: Episode seed.

    Returns:
        (summary, observations seen by the policy stacked as rows)
    """
    obs, _ = env.reset(seed=seed)
    observations = [obs]
    zero = ResidualAction.zeros()
    while True:
        action = zero if policy is None else policy(obs)
        obs, _, terminated, truncated, _ = env.step(action)
        if terminated or truncated:
            break
        observations.append(obs)
    return env.summary(), np.asarray(observations)
