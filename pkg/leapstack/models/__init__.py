"""Domain value types."""

from leapstack.models.commands import (
    ACTION_DIM,
    JumpTask,
    LegSchedule,
    LiftoffVelocity,
    MotorCommand,
    ResidualAction,
    StanceCommand,
    WbcCommand,
)
from leapstack.models.state import (
    FootForces,
    LegGeometry,
    RigidBodyState,
    RobotModel,
    default_robot_model,
)

__all__ = [
    "ACTION_DIM",
    "FootForces",
    "JumpTask",
    "LegGeometry",
    "LegSchedule",
    "LiftoffVelocity",
    "MotorCommand",
    "ResidualAction",
    "RigidBodyState",
    "RobotModel",
    "StanceCommand",
    "WbcCommand",
    "default_robot_model",
]
