"""Tests for the whole-body controller."""

import numpy as np
import pytest

from leapstack.config import WbcConfig
from leapstack.control.qp import SolverStatus
from leapstack.control.wbc import (
    WholeBodyController,
    assemble_command,
    desired_wrench,
    distribute_forces,
    force_qp,
    motor_command,
    skew,
    wrench_map,
)
from leapstack.models.commands import StanceCommand, WbcCommand
from leapstack.models.state import FootForces
from leapstack.sim import actuate, kinematics, torques_to_foot_forces
from leapstack.sim.rigid_body import joint_velocities


def accel_command(linear, yaw: float = 0.0, roll: float = 0.0, pitch: float = 0.0):
    return StanceCommand(
        linear_acceleration=np.asarray(linear, dtype=float),
        yaw_angular_acceleration=yaw,
        roll=roll,
        pitch=pitch,
    )


class TestAssembleCommand:
    """Tests for assemble_command."""

    def test_zero_command_holds_pose(self, stand):
        """Test an all-zero stance command holds the current pose."""
        cmd = assemble_command(StanceCommand.zeros(), stand)
        assert cmd.base_pose_des.tolist() == [0.0, 0.0, 0.27, 0.0, 0.0, 0.0]
        assert cmd.base_velocity_des.tolist() == [0.0] * 6
        assert cmd.base_acceleration_des.tolist() == [0.0] * 6
        assert cmd.desired_contact == (True, True, True, True)

    def test_roll_slot(self, stand):
        """Test roll goes to the pose while angular rates stay zero."""
        cmd = assemble_command(accel_command([0.0, 0.0, 1.0], yaw=2.0, roll=0.1), stand)
        assert cmd.base_pose_des[3] == pytest.approx(0.1)
        assert cmd.base_velocity_des[3:].tolist() == [0.0, 0.0, 0.0]
        assert cmd.base_acceleration_des.tolist() == [0.0, 0.0, 1.0, 0.0, 0.0, 2.0]

    def test_velocity_slot_tracks_current(self, stand):
        """Test the linear velocity slot holds the current velocity."""
        state = stand.replace(linear_velocity=np.array([0.5, 0.0, 1.0]))
        cmd = assemble_command(StanceCommand.zeros(), state, desired_contact=(False,) * 4)
        assert cmd.base_velocity_des[:3].tolist() == [0.5, 0.0, 1.0]
        assert cmd.desired_contact == (False, False, False, False)


class TestWrenchMap:
    """Tests for the contact wrench map."""

    def test_skew(self):
        """Test [v]x u == v x u."""
        v, u = np.array([1.0, 2.0, 3.0]), np.array([-1.0, 0.5, 4.0])
        assert skew(v) @ u == pytest.approx(np.cross(v, u))

    def test_shape(self, stand):
        """Test the stacked map shape."""
        assert wrench_map(stand.feet_relative()).shape == (6, 12)


class TestDistributeForces:
    """Tests for distribute_forces."""

    def test_hover(self, model, stand):
        """Test zero acceleration shares the weight equally."""
        result = distribute_forces(assemble_command(StanceCommand.zeros(), stand), stand, model)
        assert result.status == SolverStatus.OK
        for leg in range(4):
            assert result.forces.forces[leg] == pytest.approx([0.0, 0.0, 36.7875], abs=1e-6)

    def test_upward_acceleration(self, model, stand):
        """Test a = g needs twice the weight."""
        cmd = assemble_command(accel_command([0.0, 0.0, 9.81]), stand)
        result = distribute_forces(cmd, stand, model)
        assert result.forces.total[2] == pytest.approx(294.3, abs=1e-3)

    def test_no_stance_feet(self, model, stand):
        """Test zero forces when no foot is available."""
        state = stand.replace(foot_in_contact=np.zeros(4, dtype=bool))
        result = distribute_forces(assemble_command(StanceCommand.zeros(), state), state, model)
        assert result.status == SolverStatus.NO_STANCE_FEET
        assert np.all(result.forces.forces == 0.0)

    def test_forces_respect_pyramid(self, model, stand):
        """Test an aggressive sideways command stays inside the friction cone."""
        cmd = assemble_command(accel_command([30.0, 0.0, 0.0]), stand)
        result = distribute_forces(cmd, stand, model)
        f = result.forces.forces
        assert np.all(f[:, 2] >= -1e-9)
        assert np.all(np.abs(f[:, 0]) <= 0.6 * f[:, 2] + 1e-7)
        assert result.wrench_error > 0.0

    def test_random_feasible_wrenches(self, model, stand):
        """Test achievable wrenches are met within 1e-6 relative."""
        rng = np.random.default_rng(7)
        a_map = wrench_map(stand.feet_relative())
        for _ in range(100):
            fz = rng.uniform(20.0, 80.0, 4)
            tangential = rng.uniform(-0.3, 0.3, (4, 2)) * fz[:, None]
            f = np.column_stack([tangential, fz])
            b = a_map @ f.ravel()
            linear = b[:3] / model.mass - np.array([0.0, 0.0, model.gravity])
            angular = np.linalg.solve(model.inertia, b[3:])
            cmd = WbcCommand(
                base_pose_des=np.array([0.0, 0.0, 0.27, 0.0, 0.0, 0.0]),
                base_velocity_des=np.zeros(6),
                base_acceleration_des=np.concatenate([linear, angular]),
                desired_contact=(True, True, True, True),
            )
            result = distribute_forces(cmd, stand, model)
            assert result.wrench_error <= 1e-6 * np.linalg.norm(b)

    def test_relabeling_feet_permutes_forces(self, model, stand):
        """Test swapping foot labels swaps the distributed forces."""
        rng = np.random.default_rng(11)
        cmd = assemble_command(accel_command([3.0, -1.0, 2.0], yaw=4.0, roll=0.05), stand)
        base = distribute_forces(cmd, stand, model).forces.forces
        for _ in range(10):
            perm = rng.permutation(4)
            relabeled = stand.replace(foot_positions=stand.foot_positions[perm])
            forces = distribute_forces(cmd, relabeled, model).forces.forces
            assert forces == pytest.approx(base[perm], abs=1e-5)

    def test_residual_describes_returned_forces(self, model, stand):
        """Test the reported residual is the stationarity of the forces handed back."""
        config = WbcConfig()
        a_map = wrench_map(stand.feet_relative())
        for linear in ([0.0, 0.0, 0.0], [30.0, 0.0, 0.0], [4.0, 3.0, 5.0]):
            cmd = assemble_command(accel_command(linear, yaw=3.0), stand)
            result = distribute_forces(cmd, stand, model, config)
            solver = force_qp(a_map, desired_wrench(cmd, stand, model), model, config)
            assert result.residual == pytest.approx(
                solver.residual(result.forces.forces.ravel()), rel=1e-9, abs=1e-12
            )

    def test_wrench_error_non_increasing(self, model, stand):
        """Test the weighted wrench error never grows across solver iterations."""
        rng = np.random.default_rng(5)
        config = WbcConfig()
        weights = np.diag(config.wrench_weights)
        a_map = wrench_map(stand.feet_relative())
        for _ in range(50):
            fz = rng.uniform(10.0, 120.0, 4)
            tangential = rng.uniform(-0.58, 0.58, (4, 2)) * fz[:, None]
            b = a_map @ np.column_stack([tangential, fz]).ravel()
            result = force_qp(a_map, b, model, config).solve()
            # objective + b'Wb = ||Af - b||_W^2 + regularizer
            scale = 1.0 + b @ weights @ b
            errors = np.asarray(result.objective_history) + b @ weights @ b
            assert np.all(np.diff(errors) <= 1e-9 * scale)
            assert np.all(errors >= -1e-6 * scale)


class TestMotorCommand:
    """Tests for motor_command."""

    def test_hover_feedforward_only(self, model, stand):
        """Test at the desired pose the PD terms vanish."""
        wbc = WholeBodyController(model, WbcConfig())
        out = wbc.compute(StanceCommand.zeros(), stand, {}, (True,) * 4)
        q = kinematics.joint_angles(stand, model)
        qdot = joint_velocities(stand, model, q)
        assert out.motor.q_des == pytest.approx(q, abs=1e-9)
        assert out.motor.qdot_des == pytest.approx(np.zeros((4, 3)), abs=1e-12)
        tau, _ = actuate(out.motor, q, qdot, torque_limit=35.0)
        assert tau == pytest.approx(out.motor.tau_ff, abs=1e-6)

    def test_feedforward_maps_forces(self, model, stand):
        """Test tau_ff = J^T(-R^T f) reproduces the forces in the simulator map."""
        forces = FootForces(forces=np.tile([0.0, 0.0, 36.7875], (4, 1)))
        cmd = assemble_command(StanceCommand.zeros(), stand)
        motor = motor_command(cmd, forces, stand, model)
        back = torques_to_foot_forces(motor.tau_ff, stand, model)
        assert back.forces == pytest.approx(forces.forces, abs=1e-9)

    def test_swing_leg_no_feedforward(self, model, stand):
        """Test swing legs track their target with zero feed-forward torque."""
        state = stand.replace(foot_in_contact=np.array([True, True, True, False]))
        target = state.foot_positions[3] + np.array([0.03, 0.0, 0.05])
        cmd = assemble_command(StanceCommand.zeros(), state, {3: target})
        motor = motor_command(cmd, FootForces.zeros(), state, model)
        assert motor.tau_ff[3].tolist() == [0.0, 0.0, 0.0]
        p_hip = kinematics.forward(motor.q_des[3], model.geometry, 1.0)
        expected = target - state.position - model.hip_offsets[3]
        assert p_hip == pytest.approx(expected, abs=1e-9)

    def test_feedforward_saturation_flag(self, model, stand):
        """Test feed-forward torques beyond the limit are clipped and flagged."""
        forces = FootForces(forces=np.tile([0.0, 0.0, 5000.0], (4, 1)))
        cmd = assemble_command(StanceCommand.zeros(), stand)
        motor = motor_command(cmd, forces, stand, model, WbcConfig(torque_limit=35.0))
        assert motor.torque_saturated is True
        assert np.all(np.abs(motor.tau_ff) <= 35.0)
