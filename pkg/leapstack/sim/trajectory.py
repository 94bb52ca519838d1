"""
Trajectory log at simulation rate.

Column order is fixed:

    time,
    px py pz, qx qy qz qw,                  base pose (7)
    vx vy vz, wx wy wz,                      base twist (6, angular in body frame)
    foot{FR,FL,RR,RL}_{x,y,z},               foot positions (12)
    contact_{FR,FL,RR,RL},                   actual contact (4)
    fx fy fz tx ty tz,                       applied contact wrench (6)

followed by controller columns:

    roll pitch yaw, desired_contact_{leg}, qp_iterations, qp_residual,
    est_pos_err, est_vel_err, reward_*, target_x target_y target_yaw
"""

from __future__ import annotations

from pathlib import Path
from typing import Final

import numpy as np

from leapstack.constants import LEG_NAMES, LogSchema
from leapstack.export.tables import write_table
from leapstack.models.state import FloatArray, RigidBodyState

STATE_COLUMNS: Final[tuple[str, ...]] = (
    "time",
    "px", "py", "pz",
    "qx", "qy", "qz", "qw",
    "vx", "vy", "vz",
    "wx", "wy", "wz",
    *(f"foot{leg}_{axis}" for leg in LEG_NAMES for axis in "xyz"),
    *(f"contact_{leg}" for leg in LEG_NAMES),
    "fx", "fy", "fz", "tx", "ty", "tz",
)

CONTROL_COLUMNS: Final[tuple[str, ...]] = (
    "roll", "pitch", "yaw",
    *(f"desired_contact_{leg}" for leg in LEG_NAMES),
    "qp_iterations", "qp_residual",
    "est_pos_err", "est_vel_err",
    "reward_total", "reward_position", "reward_orientation", "reward_contact",
    "target_x", "target_y", "target_yaw",
)

TRAJECTORY_COLUMNS: Final[tuple[str, ...]] = STATE_COLUMNS + CONTROL_COLUMNS


def state_row(state: RigidBodyState, wrench: FloatArray) -> dict[str, float]:
    """Simulator columns for one state."""
    values = [
        state.time,
        *state.position,
        *state.orientation,
        *state.linear_velocity,
        *state.angular_velocity,
        *np.asarray(state.foot_positions).ravel(),
        *(1.0 if c else 0.0 for c in state.foot_in_contact),
        *np.asarray(wrench, dtype=np.float64),
    ]
    row = {name: float(v) for name, v in zip(STATE_COLUMNS, values, strict=True)}
    rpy = state.rpy
    row.update(roll=float(rpy[0]), pitch=float(rpy[1]), yaw=float(rpy[2]))
    return row


class TrajectoryLog:
    """
    Accumulates trajectory rows and writes them as CSV.

    Example:
        >>> log = TrajectoryLog()
        >>> log.append(state, np.zeros(6), qp_iterations=3)
        >>> log.write("rollout.csv")
    """

    def __init__(self) -> None:
        self._rows: list[dict[str, float]] = []

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> list[dict[str, float]]:
        return list(self._rows)

    def append(self, state: RigidBodyState, wrench: FloatArray, **extra: float) -> None:
        """
        Record one simulator step.

        Args:
            state: State after the step.
            wrench: Applied contact wrench during the step.
            **extra: Controller columns; missing ones are written as 0.
        """
        row = dict.fromkeys(CONTROL_COLUMNS, 0.0)
        row.update(state_row(state, wrench))
        unknown = set(extra) - set(CONTROL_COLUMNS)
        if unknown:
            raise KeyError(f"Unknown trajectory columns: {sorted(unknown)}")
        row.update({k: float(v) for k, v in extra.items()})
        self._rows.append(row)

    def column(self, name: str) -> FloatArray:
        return np.array([row[name] for row in self._rows], dtype=np.float64)

    def write(self, path: str | Path) -> Path:
        """Write the log with its schema line."""
        return write_table(path, LogSchema.TRAJECTORY, TRAJECTORY_COLUMNS, self._rows)
