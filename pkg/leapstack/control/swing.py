"""
Swing-leg controller: Raibert landing targets and the foot path to them.

The landing target sits at the neutral foothold (the ground projection of
the point under the hip, using yaw only) shifted by half a stance period of
travel plus a velocity-error feedback term. The foot follows a cubic
smoothstep horizontally and a parabolic bump vertically.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.spatial.transform import Rotation

from leapstack.config import RaibertVelocitySource, SwingConfig
from leapstack.models.commands import LegSchedule, LiftoffVelocity
from leapstack.models.state import FloatArray, RigidBodyState, RobotModel

logger = logging.getLogger(__name__)


def raibert_target(
    com_velocity: FloatArray,
    desired_velocity: FloatArray,
    hip_world: FloatArray,
    stance_duration: float,
    gain: float,
    max_offset: float | None = None,
) -> FloatArray:
    """
    Raibert-heuristic landing target on the ground.

    target = hip_xy + (T_st/2)·v + gain·(v − v_des), z = 0

    Args:
        com_velocity: Current CoM velocity (world).
        desired_velocity: Desired CoM velocity (world).
        hip_world: Neutral point above the foot (world); only x, y are used.
        stance_duration: Stance phase length T_st (s), > 0.
        gain: Velocity feedback gain (s).
        max_offset: Horizontal offset bound around the neutral point; None
            disables clipping.

    Returns:
        World-frame target with z = 0.

    Example:
        >>> raibert_target(np.array([1.0, 0, 0]), np.array([2.0, 0, 0]),
        ...                np.zeros(3), 0.5, 0.03).round(6).tolist()
        [0.22, 0.0, 0.0]
    """
    if stance_duration <= 0.0:
        raise ValueError("stance_duration must be > 0")
    v = np.asarray(com_velocity, dtype=np.float64)
    v_des = np.asarray(desired_velocity, dtype=np.float64)
    offset = 0.5 * stance_duration * v[:2] + gain * (v[:2] - v_des[:2])
    if max_offset is not None:
        norm = float(np.linalg.norm(offset))
        if norm > max_offset:
            offset = offset * (max_offset / norm)
    return np.array([hip_world[0] + offset[0], hip_world[1] + offset[1], 0.0])


def swing_path(
    start: FloatArray, target: FloatArray, phase: float, apex_height: float
) -> FloatArray:
    """
    Foot position along the swing path.

    Horizontal: cubic smoothstep 3φ² − 2φ³ (zero end velocities).
    Vertical: linear blend plus 4·apex·φ(1 − φ).

    Raises:
        ValueError: If phase is outside [0, 1].
    """
    if not 0.0 <= phase <= 1.0:
        raise ValueError(f"phase must be in [0, 1], got {phase}")
    p0 = np.asarray(start, dtype=np.float64)
    p1 = np.asarray(target, dtype=np.float64)
    if phase == 0.0:
        return p0.copy()
    if phase == 1.0:
        return p1.copy()
    blend = phase * phase * (3.0 - 2.0 * phase)
    point = p0 + blend * (p1 - p0)
    point[2] = p0[2] + phase * (p1[2] - p0[2]) + 4.0 * apex_height * phase * (1.0 - phase)
    return point


def neutral_footholds(state: RigidBodyState, model: RobotModel) -> FloatArray:
    """
    Ground points under each leg's abduction point, rotated by yaw only.

    Returns:
        4x3 world positions with z = 0.
    """
    yaw_only = Rotation.from_euler("z", state.yaw)
    points = state.position + yaw_only.apply(model.abduction_points())
    points[:, 2] = 0.0
    return np.asarray(points)


class SwingController:
    """
    Computes swing-foot targets for all legs not in contact.

    Args:
        config: Swing gains.
        model: Robot description.
        stance_duration: Stance phase length used by the Raibert term.
    """

    def __init__(self, config: SwingConfig, model: RobotModel, stance_duration: float) -> None:
        self._config = config
        self._model = model
        self._stance_duration = stance_duration

    def desired_velocity(self, liftoff: LiftoffVelocity | None) -> FloatArray:
        """Desired velocity fed to the Raibert feedback term."""
        if liftoff is None or self._config.desired_velocity == RaibertVelocitySource.ZERO:
            return np.zeros(3)
        return liftoff.planar

    def landing_targets(self, state: RigidBodyState, liftoff: LiftoffVelocity | None) -> FloatArray:
        """Raibert targets for all four legs (4x3)."""
        v_des = self.desired_velocity(liftoff)
        footholds = neutral_footholds(state, self._model)
        return np.stack(
            [
                raibert_target(
                    state.linear_velocity,
                    v_des,
                    footholds[leg],
                    self._stance_duration,
                    self._config.raibert_gain,
                    self._config.max_landing_offset,
                )
                for leg in range(4)
            ]
        )

    def targets(
        self,
        state: RigidBodyState,
        schedule: LegSchedule,
        liftoff_feet: FloatArray,
        liftoff: LiftoffVelocity | None,
    ) -> dict[int, FloatArray]:
        """
        Swing-path positions for feet not in contact.

        Args:
            state: Current state.
            schedule: Current schedule; during stance airborne feet head
                straight for their landing targets.
            liftoff_feet: 4x3 foot positions recorded at lift-off.
            liftoff: Lift-off velocity of the current jump, if any.

        Returns:
            Mapping leg index -> world-frame foot target.
        """
        airborne = [leg for leg in range(4) if not state.foot_in_contact[leg]]
        if not airborne:
            return {}
        landing = self.landing_targets(state, liftoff)
        phase = 1.0 if schedule.in_stance else min(max(schedule.phase_fraction, 0.0), 1.0)
        return {
            leg: swing_path(liftoff_feet[leg], landing[leg], phase, self._config.apex_height)
            for leg in airborne
        }
