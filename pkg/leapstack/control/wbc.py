"""
Whole-body controller for the single-rigid-body model.

Three stages per control tick:

1. assemble_command fills the 18-value base command. Position, height and
   yaw hold the current pose; roll and pitch come from the stance command.
   Linear velocity holds the current velocity, angular velocity is zero.
   Linear and yaw accelerations come from the stance command; roll and
   pitch accelerations are zero.
2. distribute_forces solves a friction-pyramid QP for the contact forces
   that best realize the commanded base wrench

       b = [m(a + g·ẑ); I_w·ω̇ + ω × I_w·ω]

   weighted by W, with a regularizer α‖N f‖² on the null space N of the
   wrench map. Achievable wrenches are then met exactly on the solution's
   active face.
3. motor_command turns the forces and the desired base pose into per-motor
   position, velocity and feed-forward torque targets.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from leapstack.config import WbcConfig
from leapstack.constants import SIDE_SIGNS
from leapstack.control.qp import PyramidQp, QpResult, SolverStatus, constraint_rows
from leapstack.models.commands import MotorCommand, StanceCommand, WbcCommand
from leapstack.models.state import BoolArray, FloatArray, FootForces, RigidBodyState, RobotModel
from leapstack.sim import kinematics
from leapstack.sim.rigid_body import damped_solve

logger = logging.getLogger(__name__)


def skew(v: FloatArray) -> FloatArray:
    """Cross-product matrix [v]× such that [v]× u = v × u."""
    x, y, z = (float(c) for c in v)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def assemble_command(
    stance_cmd: StanceCommand,
    state: RigidBodyState,
    swing_targets: dict[int, FloatArray] | None = None,
    desired_contact: tuple[bool, bool, bool, bool] | None = None,
) -> WbcCommand:
    """
    Fill the 18-value base command from a stance command.

    Args:
        stance_cmd: Acceleration/attitude command.
        state: Current (estimated) state.
        swing_targets: World-frame targets of feet not in contact.
        desired_contact: Scheduled contacts; defaults to actual contacts.

    Returns:
        WbcCommand following the slot rules above.
    """
    rpy = state.rpy
    contacts = (
        tuple(bool(c) for c in state.foot_in_contact)
        if desired_contact is None
        else desired_contact
    )
    return WbcCommand(
        base_pose_des=np.array(
            [*state.position, stance_cmd.roll, stance_cmd.pitch, rpy[2]]
        ),
        base_velocity_des=np.array([*state.linear_velocity, 0.0, 0.0, 0.0]),
        base_acceleration_des=np.array(
            [*stance_cmd.linear_acceleration, 0.0, 0.0, stance_cmd.yaw_angular_acceleration]
        ),
        desired_contact=contacts,  # type: ignore[arg-type]
        swing_foot_targets=dict(swing_targets or {}),
    )


def wrench_map(foot_offsets: FloatArray) -> FloatArray:
    """
    Stacked per-foot wrench map [I; [r_i]×], shape 6 x 3n.

    Args:
        foot_offsets: nx3 foot positions relative to the CoM (world).
    """
    offsets = np.atleast_2d(np.asarray(foot_offsets, dtype=np.float64))
    columns = [np.vstack([np.eye(3), skew(r)]) for r in offsets]
    return np.hstack(columns) if columns else np.zeros((6, 0))


def desired_wrench(cmd: WbcCommand, state: RigidBodyState, model: RobotModel) -> FloatArray:
    """Base wrench b realizing the commanded accelerations (world frame)."""
    rot = state.rotation_matrix
    inertia_world = rot @ model.inertia @ rot.T
    omega = state.angular_velocity_world
    force = model.mass * (cmd.linear_acceleration + np.array([0.0, 0.0, model.gravity]))
    torque = inertia_world @ cmd.angular_acceleration + np.cross(omega, inertia_world @ omega)
    return np.concatenate([force, torque])


@dataclass(frozen=True, eq=False)
class ForceDistribution:
    """
    Contact forces for all four feet plus solver diagnostics.

    Attributes:
        forces: World-frame forces; zero for feet not in the problem.
        status: Outcome of the QP solve that preceded the wrench match.
        iterations: Projected-gradient iterations.
        residual: Stationarity residual of the returned forces.
        wrench_error: ‖A f − b‖ of the returned forces.
        objective_history: QP objective per iteration.
    """

    forces: FootForces
    status: SolverStatus
    iterations: int = 0
    residual: float = 0.0
    wrench_error: float = 0.0
    objective_history: tuple[float, ...] = ()


def _match_wrench(
    forces: FloatArray, a_map: FloatArray, target: FloatArray, mu: float, fmax: float
) -> FloatArray | None:
    """
    Minimum-norm correction meeting A f = b on the active face of f.

    Returns:
        Corrected forces if b is reachable without leaving the face and
        without violating any constraint, else None.
    """
    n = forces.shape[0]
    rows, bounds = constraint_rows(mu, fmax)
    scale = max(1.0, float(np.max(np.abs(forces))))
    tol = 1e-9 * scale
    blocks: list[FloatArray] = [a_map]
    for i in range(n):
        if forces[i, 2] <= tol:
            for j in range(3):
                pin = np.zeros(3 * n)
                pin[3 * i + j] = 1.0
                blocks.append(pin[None, :])
            continue
        slack = bounds - rows @ forces[i]
        for r in range(1, 6):
            if slack[r] <= tol:
                row = np.zeros(3 * n)
                row[3 * i : 3 * i + 3] = rows[r]
                blocks.append(row[None, :])
    system = np.vstack(blocks)
    rhs = np.zeros(system.shape[0])
    rhs[:6] = target - a_map @ forces.ravel()
    delta, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    if np.linalg.norm(system @ delta - rhs) > 1e-9 * (1.0 + np.linalg.norm(target)):
        return None
    candidate = forces + delta.reshape(n, 3)
    if float(np.max(candidate @ rows.T - bounds)) > tol:
        return None
    return np.asarray(candidate)


def force_qp(
    a_map: FloatArray, target: FloatArray, model: RobotModel, config: WbcConfig
) -> PyramidQp:
    """Weighted wrench-tracking QP with the null-space regularizer."""
    weights = np.diag(config.wrench_weights)
    null_proj = np.eye(a_map.shape[1]) - np.linalg.pinv(a_map) @ a_map
    hessian = 2.0 * (a_map.T @ weights @ a_map + config.regularization * null_proj)
    linear = -2.0 * a_map.T @ weights @ target
    return PyramidQp(
        hessian,
        linear,
        model.friction_coefficient,
        model.max_normal_force,
        max_iterations=config.max_iterations,
        tolerance=config.tolerance,
        polish_rounds=config.polish_rounds,
    )


def distribute_forces(
    cmd: WbcCommand,
    state: RigidBodyState,
    model: RobotModel,
    config: WbcConfig | None = None,
    contacts: BoolArray | None = None,
) -> ForceDistribution:
    """
    Solve for ground reaction forces realizing the commanded wrench.

    Args:
        cmd: Base command (accelerations are used).
        state: Current state (foot positions, orientation, angular velocity).
        model: Robot description.
        config: Solver settings; defaults to WbcConfig().
        contacts: Feet that may carry force; defaults to actual contacts.

    Returns:
        ForceDistribution; zero forces with NO_STANCE_FEET when no foot
        is available, best iterate with NOT_CONVERGED on iteration limit.
    """
    cfg = config or WbcConfig()
    mask = state.foot_in_contact if contacts is None else np.asarray(contacts, dtype=bool)
    legs = [leg for leg in range(4) if mask[leg]]
    if not legs:
        return ForceDistribution(forces=FootForces.zeros(), status=SolverStatus.NO_STANCE_FEET)

    offsets = state.foot_positions[legs] - state.position
    a_map = wrench_map(offsets)
    target = desired_wrench(cmd, state, model)
    solver = force_qp(a_map, target, model, cfg)
    result: QpResult = solver.solve()
    solution = result.forces
    matched = _match_wrench(
        solution, a_map, target, model.friction_coefficient, model.max_normal_force
    )
    if matched is not None:
        solution = matched
    residual = result.residual if matched is None else solver.residual(solution.ravel())

    forces = np.zeros((4, 3))
    forces[legs] = solution
    error = float(np.linalg.norm(a_map @ solution.ravel() - target))
    if not result.ok:
        logger.debug(
            "Force distribution %s: residual %.3e after %d iterations",
            result.status.name,
            residual,
            result.iterations,
        )
    return ForceDistribution(
        forces=FootForces(forces=forces),
        status=result.status,
        iterations=result.iterations,
        residual=residual,
        wrench_error=error,
        objective_history=result.objective_history,
    )


def motor_command(
    cmd: WbcCommand,
    forces: FootForces,
    state: RigidBodyState,
    model: RobotModel,
    config: WbcConfig | None = None,
) -> MotorCommand:
    """
    Per-motor targets for the impedance law.

    Legs in contact: q̄ from IK of the foot under the desired base pose,
    q̇̄ from damped differential IK of the desired base velocity, and
    τ̄ = Jᵀ(−Rᵀ f) at the current joint angles. Other legs: q̄ from IK of the
    swing target (or the current foot), q̇̄ = 0, τ̄ = 0.

    Targets outside the workspace are clipped and flagged.
    """
    cfg = config or WbcConfig()
    geo = model.geometry
    rot = state.rotation_matrix
    rot_des = cmd.rotation_des.as_matrix()
    p_des = cmd.base_pose_des[:3]
    v_des = cmd.base_velocity_des[:3]
    q_now = kinematics.joint_angles(state, model)

    q_des = np.zeros((4, 3))
    qdot_des = np.zeros((4, 3))
    tau_ff = np.zeros((4, 3))
    ik_clipped = False
    for leg, side in enumerate(SIDE_SIGNS):
        hip = model.hip_offsets[leg]
        if state.foot_in_contact[leg]:
            p_hip = rot_des.T @ (state.foot_positions[leg] - p_des) - hip
            p_hip, clipped = kinematics.clip_to_workspace(p_hip, geo, side)
            q_des[leg] = kinematics.inverse(p_hip, geo, side)
            jac_des = kinematics.jacobian(q_des[leg], geo, side)
            qdot_des[leg] = damped_solve(jac_des, rot_des.T @ (-v_des), cfg.ik_damping)
            jac = kinematics.jacobian(q_now[leg], geo, side)
            tau_ff[leg] = jac.T @ (-rot.T @ forces.forces[leg])
        else:
            foot = cmd.swing_foot_targets.get(leg, state.foot_positions[leg])
            p_hip = kinematics.foot_in_hip_frame(foot, state.position, rot, hip)
            p_hip, clipped = kinematics.clip_to_workspace(p_hip, geo, side)
            q_des[leg] = kinematics.inverse(p_hip, geo, side)
        ik_clipped = ik_clipped or clipped

    saturated = bool(np.any(np.abs(tau_ff) > cfg.torque_limit))
    if saturated:
        logger.debug("Feed-forward torque saturated at t=%.3f", state.time)
    return MotorCommand(
        q_des=q_des,
        qdot_des=qdot_des,
        tau_ff=np.clip(tau_ff, -cfg.torque_limit, cfg.torque_limit),
        kp=cfg.kp,
        kd=cfg.kd,
        torque_saturated=saturated,
        ik_clipped=ik_clipped,
    )


@dataclass(frozen=True, eq=False)
class WbcOutput:
    """Everything the WBC produced for one tick."""

    command: WbcCommand
    distribution: ForceDistribution
    motor: MotorCommand


class WholeBodyController:
    """Binds the robot model and WBC settings."""

    def __init__(self, model: RobotModel, config: WbcConfig) -> None:
        self._model = model
        self._config = config

    @property
    def config(self) -> WbcConfig:
        return self._config

    def compute(
        self,
        stance_cmd: StanceCommand,
        state: RigidBodyState,
        swing_targets: dict[int, FloatArray],
        desired_contact: tuple[bool, bool, bool, bool],
    ) -> WbcOutput:
        """Assemble, distribute forces and build the motor command."""
        command = assemble_command(stance_cmd, state, swing_targets, desired_contact)
        distribution = distribute_forces(command, state, self._model, self._config)
        motor = motor_command(command, distribution.forces, state, self._model, self._config)
        return WbcOutput(command=command, distribution=distribution, motor=motor)
