"""Leg kinematics, the single-rigid-body simulator and its trajectory log."""

from leapstack.sim.rigid_body import (
    Simulator,
    StepResult,
    actuate,
    project_friction,
    torques_to_foot_forces,
)
from leapstack.sim.trajectory import TRAJECTORY_COLUMNS, TrajectoryLog

__all__ = [
    "TRAJECTORY_COLUMNS",
    "Simulator",
    "StepResult",
    "TrajectoryLog",
    "actuate",
    "project_friction",
    "torques_to_foot_forces",
]
