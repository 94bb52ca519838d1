"""
Open-loop pronking contact schedule.

All four legs share one phase: stance on [0, T_st), swing on [T_st, T_st + T_sw)
within each cycle. Phase boundaries belong to the phase being entered, so
t = T_st is already swing.

Example:
    >>> s = schedule_at(0.75)
    >>> s.in_stance, s.remaining_phase_time, s.phase_fraction
    (False, 0.25, 0.5)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from leapstack.constants import RobotConstants
from leapstack.exceptions import InvalidDurationError
from leapstack.models.commands import LegSchedule


def schedule_at(t: float, stance_duration: float = 0.5, swing_duration: float = 0.5) -> LegSchedule:
    """
    Desired contact pattern at time t.

    Args:
        t: Time since episode start (s), t >= 0.
        stance_duration: Stance phase length (s).
        swing_duration: Swing phase length (s).

    Returns:
        LegSchedule for t.

    Raises:
        InvalidDurationError: If either duration is <= 0.
        ValueError: If t < 0.
    """
    if stance_duration <= 0.0:
        raise InvalidDurationError("stance_duration", stance_duration)
    if swing_duration <= 0.0:
        raise InvalidDurationError("swing_duration", swing_duration)
    digits = RobotConstants.TIME_RESOLUTION
    t = round(t, digits)
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")

    cycle = stance_duration + swing_duration
    cycle_index = math.floor(round(t / cycle, digits))
    in_cycle = round(t - cycle_index * cycle, digits)
    if in_cycle < 0.0:
        in_cycle = 0.0

    if in_cycle < stance_duration:
        elapsed, duration, stance = in_cycle, stance_duration, True
    else:
        elapsed, duration, stance = round(in_cycle - stance_duration, digits), swing_duration, False

    return LegSchedule(
        desired_contact=(stance, stance, stance, stance),
        phase_fraction=elapsed / duration,
        remaining_phase_time=round(duration - elapsed, digits),
        cycle_index=cycle_index,
        stance_duration=stance_duration,
        swing_duration=swing_duration,
    )


@dataclass(frozen=True)
class PronkingGait:
    """Schedule with fixed phase durations."""

    stance_duration: float = 0.5
    swing_duration: float = 0.5

    def __post_init__(self) -> None:
        if self.stance_duration <= 0.0:
            raise InvalidDurationError("stance_duration", self.stance_duration)
        if self.swing_duration <= 0.0:
            raise InvalidDurationError("swing_duration", self.swing_duration)

    @property
    def cycle_duration(self) -> float:
        return self.stance_duration + self.swing_duration

    def at(self, t: float) -> LegSchedule:
        return schedule_at(t, self.stance_duration, self.swing_duration)
