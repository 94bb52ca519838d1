"""
Single-rigid-body quadruped simulator with massless legs.

Contact model:
- stance feet are pinned in the world; their ground reaction force is the
  exact image of the joint torques through the leg Jacobian, projected
  onto the friction pyramid
- swing feet are kinematic and follow the swing controller's targets,
  clipped to a reach sphere around the hip
- a swing foot is pinned on touchdown (z within tolerance of the ground)
  when the schedule asks for stance, or during the second half of a
  scheduled swing (early touchdown)
- a pinned foot is released when the schedule asks for swing and the base
  moves up faster than the lift-off speed, or when the leg runs out of reach

Integration is semi-implicit Euler: velocities first, then positions with
the new velocities. Orientation is advanced with the body-frame rotation
vector ω·dt and renormalized every step.

Simulator.step is a pure function of its inputs; the Simulator object only
holds the robot model and contact parameters.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from leapstack.constants import SIDE_SIGNS, RobotConstants
from leapstack.exceptions import NonFiniteStateError, OutOfReachError
from leapstack.models.commands import LegSchedule, MotorCommand
from leapstack.models.state import BoolArray, FloatArray, FootForces, RigidBodyState, RobotModel
from leapstack.sim import kinematics

logger = logging.getLogger(__name__)


def project_friction(
    force: FloatArray, mu: float, max_normal_force: float = float("inf")
) -> FloatArray:
    """
    Project a contact force onto the per-axis friction pyramid.

    f_z is clamped to [0, f_max]; then |f_x|, |f_y| are clamped to μ·f_z.

    Example:
        >>> project_friction(np.array([80.0, 0.0, 100.0]), 0.6).tolist()
        [60.0, 0.0, 100.0]
    """
    f = np.asarray(force, dtype=np.float64)
    fz = min(max(float(f[2]), 0.0), max_normal_force)
    limit = mu * fz
    return np.array(
        [min(max(float(f[0]), -limit), limit), min(max(float(f[1]), -limit), limit), fz]
    )


def torques_to_foot_forces(
    joint_torques: FloatArray,
    state: RigidBodyState,
    model: RobotModel,
    contacts: BoolArray | None = None,
) -> FootForces:
    """
    Map joint torques to the world-frame ground reaction force on each contact foot.

    With massless legs the map is exact: f = R·(-J⁻ᵀ τ). Joint angles come
    from leg IK of the current foot positions.

    Args:
        joint_torques: 4x3 torques in N·m.
        state: Current state (base pose and foot positions).
        model: Robot description.
        contacts: Feet to evaluate; defaults to state.foot_in_contact.

    Returns:
        FootForces with zero rows for swing feet and for singular legs,
        which are also flagged in FootForces.singular.
    """
    torques = np.asarray(joint_torques, dtype=np.float64).reshape(4, 3)
    mask = state.foot_in_contact if contacts is None else np.asarray(contacts, dtype=bool)
    rot = state.rotation_matrix
    forces = np.zeros((4, 3))
    singular = np.zeros(4, dtype=bool)
    if not np.any(mask):
        return FootForces(forces=forces, singular=singular)

    q = kinematics.joint_angles(state, model)
    for leg, side in enumerate(SIDE_SIGNS):
        if not mask[leg]:
            continue
        jac = kinematics.jacobian(q[leg], model.geometry, side)
        if kinematics.is_singular(jac):
            logger.debug("Leg %d singular at q=%s; zero force", leg, q[leg])
            singular[leg] = True
            continue
        foot_on_ground_body = np.linalg.solve(jac.T, torques[leg])
        forces[leg] = -rot @ foot_on_ground_body
    return FootForces(forces=forces, singular=singular)


def joint_velocities(state: RigidBodyState, model: RobotModel, q: FloatArray) -> FloatArray:
    """
    Joint velocities implied by base twist and foot velocities.

    Uses d/dt[Rᵀ(p_f − p)] = Rᵀ(ṗ_f − v) − ω × Rᵀ(p_f − p) mapped through J⁻¹
    (damped near singularities).
    """
    rot = state.rotation_matrix
    qdot = np.zeros((4, 3))
    for leg, side in enumerate(SIDE_SIGNS):
        rel_body = rot.T @ (state.foot_positions[leg] - state.position)
        hip_rate = rot.T @ (state.foot_velocities[leg] - state.linear_velocity) - np.cross(
            state.angular_velocity, rel_body
        )
        jac = kinematics.jacobian(q[leg], model.geometry, side)
        qdot[leg] = damped_solve(jac, hip_rate, 1e-6)
    return qdot


def damped_solve(jac: FloatArray, rhs: FloatArray, damping: float) -> FloatArray:
    """Damped least squares: (JᵀJ + λI)⁻¹ Jᵀ rhs."""
    return np.asarray(np.linalg.solve(jac.T @ jac + damping * np.eye(3), jac.T @ rhs))


def actuate(
    command: MotorCommand, q: FloatArray, qdot: FloatArray, torque_limit: float
) -> tuple[FloatArray, bool]:
    """
    Motor impedance law τ = kp(q̄ − q) + kd(q̇̄ − q̇) + τ̄ with saturation.

    Returns:
        (4x3 applied torques, whether any joint saturated)
    """
    tau = (
        command.kp * (command.q_des - q)
        + command.kd * (command.qdot_des - qdot)
        + command.tau_ff
    )
    saturated = bool(np.any(np.abs(tau) > torque_limit))
    return np.clip(tau, -torque_limit, torque_limit), saturated


@dataclass(frozen=True, eq=False)
class StepResult:
    """
    Outcome of one simulator step.

    Attributes:
        state: Next state.
        forces: Projected ground reaction forces applied during the step.
        wrench: Net contact wrench (force, torque about CoM), world frame.
        linear_acceleration: CoM acceleration including gravity (m/s²).
        released: Feet that left the ground this step.
        touchdown: Feet pinned this step.
        early_touchdown: Feet pinned during a scheduled swing.
        torque_saturated: Whether the actuator clipped any torque.
    """

    state: RigidBodyState
    forces: FootForces
    wrench: FloatArray
    linear_acceleration: FloatArray
    released: BoolArray
    touchdown: BoolArray
    early_touchdown: BoolArray
    torque_saturated: bool = False


class Simulator:
    """
    Fixed-step single-rigid-body simulator.

    Example:
        >>> model = default_robot_model()
        >>> sim = Simulator(model)
        >>> state = RigidBodyState.nominal_stand(model)
        >>> result = sim.step(state, np.zeros((4, 3)), {}, schedule_at(0.0))
    """

    def __init__(
        self,
        model: RobotModel,
        dt: float = RobotConstants.CONTROL_DT,
        touchdown_tolerance: float = 0.01,
        leg_reach: float = 0.40,
        liftoff_speed: float = 0.1,
    ) -> None:
        if dt <= 0.0:
            raise ValueError("dt must be > 0")
        self._model = model
        self._dt = dt
        self._touchdown_tolerance = touchdown_tolerance
        self._leg_reach = leg_reach
        self._liftoff_speed = liftoff_speed

    @property
    def model(self) -> RobotModel:
        return self._model

    @property
    def dt(self) -> float:
        return self._dt

    def _release(self, state: RigidBodyState, schedule: LegSchedule) -> BoolArray:
        """Contact mask after lift-off and reach checks."""
        contact = np.array(state.foot_in_contact, dtype=bool)
        rising = state.linear_velocity[2] > self._liftoff_speed
        rot = state.rotation_matrix
        for leg, side in enumerate(SIDE_SIGNS):
            if not contact[leg]:
                continue
            if not schedule.desired_contact[leg] and rising:
                contact[leg] = False
                continue
            p_hip = kinematics.foot_in_hip_frame(
                state.foot_positions[leg], state.position, rot, self._model.hip_offsets[leg]
            )
            try:
                kinematics.inverse(p_hip, self._model.geometry, side)
            except OutOfReachError:
                logger.debug("Leg %d out of reach at t=%.3f; releasing", leg, state.time)
                contact[leg] = False
        return contact

    def step(
        self,
        state: RigidBodyState,
        joint_torques: FloatArray,
        swing_targets: dict[int, FloatArray],
        schedule: LegSchedule,
        dt: float | None = None,
    ) -> StepResult:
        """
        Advance the simulation by one step.

        Args:
            state: Current state.
            joint_torques: 4x3 applied joint torques.
            swing_targets: World-frame targets for feet not in contact;
                feet without a target keep their body-frame position.
            schedule: Desired contact pattern at state.time.
            dt: Step size; defaults to the simulator's dt.

        Returns:
            StepResult with the next state and contact diagnostics.

        Raises:
            NonFiniteStateError: If any state entry becomes NaN or Inf.
        """
        h = self._dt if dt is None else dt
        if h <= 0.0:
            raise ValueError("dt must be > 0")
        model = self._model
        contact = self._release(state, schedule)
        released = np.array(state.foot_in_contact, dtype=bool) & ~contact

        raw = torques_to_foot_forces(joint_torques, state, model, contacts=contact)
        forces = np.zeros((4, 3))
        for leg in range(4):
            if contact[leg]:
                forces[leg] = project_friction(
                    raw.forces[leg], model.friction_coefficient, model.max_normal_force
                )

        rot = state.rotation_matrix
        total_force = forces.sum(axis=0)
        lever = state.foot_positions - state.position
        torque_world = np.cross(lever, forces).sum(axis=0)
        acceleration = total_force / model.mass + model.gravity_vector

        omega = state.angular_velocity
        torque_body = rot.T @ torque_world
        omega_dot = model.inertia_inv @ (torque_body - np.cross(omega, model.inertia @ omega))
        omega_new = omega + omega_dot * h
        velocity_new = state.linear_velocity + acceleration * h
        position_new = state.position + velocity_new * h
        for name, value in (
            ("linear_velocity", velocity_new),
            ("position", position_new),
            ("angular_velocity", omega_new),
        ):
            if not np.all(np.isfinite(value)):
                raise NonFiniteStateError(field=name, time=state.time + h)
        rotation_new = state.rotation * Rotation.from_rotvec(omega_new * h)
        quat = rotation_new.as_quat()
        quat = quat / np.linalg.norm(quat)
        rot_new = Rotation.from_quat(quat).as_matrix()

        feet = np.array(state.foot_positions)
        touchdown = np.zeros(4, dtype=bool)
        early = np.zeros(4, dtype=bool)
        for leg in range(4):
            if contact[leg]:
                continue
            if leg in swing_targets:
                target = np.asarray(swing_targets[leg], dtype=np.float64)
            else:
                target = position_new + rot_new @ (rot.T @ lever[leg])
            hip = position_new + rot_new @ model.hip_offsets[leg]
            offset = target - hip
            distance = float(np.linalg.norm(offset))
            if distance > self._leg_reach:
                target = hip + offset * (self._leg_reach / distance)
            scheduled_stance = schedule.desired_contact[leg]
            # the tolerance band applies from mid-swing on; before that only penetration lands
            late = scheduled_stance or schedule.phase_fraction >= 0.5
            if target[2] < 0.0 or (late and target[2] <= self._touchdown_tolerance):
                target = np.array([target[0], target[1], 0.0])
                contact[leg] = True
                touchdown[leg] = True
                early[leg] = not scheduled_stance
            feet[leg] = target

        if np.any(early):
            logger.debug("Early touchdown of legs %s at t=%.3f", np.flatnonzero(early), state.time)

        next_state = RigidBodyState(
            position=position_new,
            orientation=quat,
            linear_velocity=velocity_new,
            angular_velocity=omega_new,
            foot_positions=feet,
            foot_in_contact=contact,
            time=state.time + h,
            foot_velocities=(feet - state.foot_positions) / h,
        )
        self._check_finite(next_state)
        return StepResult(
            state=next_state,
            forces=FootForces(forces=forces, singular=raw.singular),
            wrench=np.concatenate([total_force, torque_world]),
            linear_acceleration=acceleration,
            released=released,
            touchdown=touchdown,
            early_touchdown=early,
        )

    def step_motor(
        self,
        state: RigidBodyState,
        command: MotorCommand,
        swing_targets: dict[int, FloatArray],
        schedule: LegSchedule,
        torque_limit: float,
    ) -> StepResult:
        """
        Apply the motor impedance law at the current joint state, then step.

        Returns:
            StepResult with torque_saturated set from the actuator.
        """
        q = kinematics.joint_angles(state, self._model)
        qdot = joint_velocities(state, self._model, q)
        torques, saturated = actuate(command, q, qdot, torque_limit)
        result = self.step(state, torques, swing_targets, schedule)
        if not saturated:
            return result
        return StepResult(
            state=result.state,
            forces=result.forces,
            wrench=result.wrench,
            linear_acceleration=result.linear_acceleration,
            released=result.released,
            touchdown=result.touchdown,
            early_touchdown=result.early_touchdown,
            torque_saturated=True,
        )

    @staticmethod
    def _check_finite(state: RigidBodyState) -> None:
        for name in (
            "position",
            "orientation",
            "linear_velocity",
            "angular_velocity",
            "foot_positions",
        ):
            if not np.all(np.isfinite(getattr(state, name))):
                raise NonFiniteStateError(field=name, time=state.time)
