"""
Physical and layout constants shared across leapstack.

Leg ordering follows the common quadruped convention: front-right,
front-left, rear-right, rear-left.
"""

from __future__ import annotations

from enum import IntEnum
from typing import Final


class Leg(IntEnum):
    """Leg indices in every 4-row array."""

    FR = 0
    """Front right."""

    FL = 1
    """Front left."""

    RR = 2
    """Rear right."""

    RL = 3
    """Rear left."""

    @property
    def side_sign(self) -> float:
        """+1 for left legs, -1 for right legs."""
        return 1.0 if self in (Leg.FL, Leg.RL) else -1.0


class RobotConstants:
    """Constants of the simulated robot and control loop."""

    NUM_LEGS: Final[int] = 4
    """Number of legs."""

    JOINTS_PER_LEG: Final[int] = 3
    """Abduction, hip pitch, knee."""

    GRAVITY: Final[float] = 9.81
    """Default gravitational acceleration in m/s^2."""

    CONTROL_DT: Final[float] = 0.002
    """Default simulation and WBC period (500 Hz)."""

    SINGULAR_DET: Final[float] = 1e-8
    """|det(J)| below this marks a singular leg Jacobian."""

    QUAT_TOLERANCE: Final[float] = 1e-9
    """Allowed deviation of the orientation quaternion norm from 1."""

    TIME_RESOLUTION: Final[int] = 9
    """Decimal places times are snapped to before phase arithmetic."""


class LogSchema:
    """Version tags written as the first line of every CSV export."""

    TRAJECTORY: Final[str] = "# leapstack-trajectory v1"
    LEARNING_CURVE: Final[str] = "# leapstack-learning-curve v1"
    FIGURE: Final[str] = "# leapstack-figure v1"


LEG_NAMES: Final[tuple[str, ...]] = tuple(leg.name for leg in Leg)
"""Leg names in array order."""

SIDE_SIGNS: Final[tuple[float, ...]] = tuple(leg.side_sign for leg in Leg)
"""Per-leg lateral sign (+1 left, -1 right) in array order."""
