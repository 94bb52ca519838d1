"""Contact schedule, swing and stance controllers, force QP, WBC and state estimator."""

from leapstack.control.estimator import BaseStateEstimator, EstimatorState
from leapstack.control.gait import PronkingGait, schedule_at
from leapstack.control.qp import PyramidQp, QpResult, SolverStatus
from leapstack.control.stance import StanceAccelController, liftoff_velocity, select_command
from leapstack.control.swing import SwingController, raibert_target, swing_path
from leapstack.control.wbc import (
    ForceDistribution,
    WholeBodyController,
    assemble_command,
    distribute_forces,
    motor_command,
)

__all__ = [
    "BaseStateEstimator",
    "EstimatorState",
    "ForceDistribution",
    "PronkingGait",
    "PyramidQp",
    "QpResult",
    "SolverStatus",
    "StanceAccelController",
    "SwingController",
    "WholeBodyController",
    "assemble_command",
    "distribute_forces",
    "liftoff_velocity",
    "motor_command",
    "raibert_target",
    "schedule_at",
    "select_command",
    "swing_path",
]
