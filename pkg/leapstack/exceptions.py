"""
Exception hierarchy for leapstack.

All exceptions inherit from LeapstackError, providing a clean hierarchy
for error handling. The design follows these principles:

1. Kinematic failures (reach, singularity) are distinct from simulation blow-ups
2. Configuration errors carry the offending field and, when known, the file line
3. Recoverable solver outcomes are reported as status flags, not exceptions
4. All exceptions provide meaningful error messages
"""

from __future__ import annotations

from typing import Final


class LeapstackError(Exception):
    """
    Base exception for all leapstack errors.

    All library-specific exceptions inherit from this class, allowing
    callers to catch all leapstack errors with a single except clause.
    """

    pass


class KinematicsError(LeapstackError):
    """
    Leg kinematics error.

    Raised when a kinematic query cannot be answered, such as:
    - A foot target outside the reachable workspace
    - A force/torque map evaluated at a singular configuration
    """

    pass


class OutOfReachError(KinematicsError):
    """
    Foot target outside the leg workspace.

    Callers are expected to clip the target to the workspace boundary
    and retry.
    """

    def __init__(
        self,
        message: str = "Foot target out of reach",
        *,
        distance: float | None = None,
        min_reach: float | None = None,
        max_reach: float | None = None,
    ) -> None:
        super().__init__(message)
        self.distance = distance
        self.min_reach = min_reach
        self.max_reach = max_reach

    def __str__(self) -> str:
        base = super().__str__()
        if self.distance is not None and self.max_reach is not None:
            return (
                f"{base} (in-plane distance {self.distance:.4f} m, "
                f"reach [{self.min_reach or 0.0:.4f}, {self.max_reach:.4f}] m)"
            )
        return base


class SingularJacobianError(KinematicsError):
    """
    Leg Jacobian is (numerically) singular.

    Signals a kinematic singularity, typically a fully stretched leg.
    """

    def __init__(
        self,
        message: str = "Singular leg Jacobian",
        *,
        leg: int | None = None,
        determinant: float | None = None,
    ) -> None:
        super().__init__(message)
        self.leg = leg
        self.determinant = determinant

    def __str__(self) -> str:
        parts = [super().__str__()]
        if self.leg is not None:
            parts.append(f"leg={self.leg}")
        if self.determinant is not None:
            parts.append(f"det={self.determinant:.3e}")
        return " ".join(parts) if len(parts) > 1 else parts[0]


class SimulationError(LeapstackError):
    """
    Simulation-level error.

    Raised when the simulator cannot produce a valid next state.
    """

    pass


class NonFiniteStateError(SimulationError):
    """
    A state entry became NaN or infinite.

    Signals integration blow-up; the environment treats it as termination.
    """

    def __init__(
        self,
        message: str = "Non-finite simulation state",
        *,
        field: str | None = None,
        time: float | None = None,
    ) -> None:
        super().__init__(message)
        self.field = field
        self.time = time

    def __str__(self) -> str:
        parts = [super().__str__()]
        if self.field:
            parts.append(f"field={self.field}")
        if self.time is not None:
            parts.append(f"t={self.time:.3f}s")
        return " ".join(parts) if len(parts) > 1 else parts[0]


class GaitError(LeapstackError):
    """Contact schedule error."""

    pass


class InvalidDurationError(GaitError):
    """Stance or swing duration is not strictly positive."""

    def __init__(self, name: str, value: float) -> None:
        self.name = name
        self.value = value
        super().__init__(f"{name} must be > 0, got {value}")


class EpisodeError(LeapstackError):
    """Environment episode error."""

    pass


class EpisodeFinishedError(EpisodeError):
    """
    step() was called after the episode ended.

    Call reset() to start a new episode.
    """

    def __init__(self, message: str = "Episode already finished; call reset()") -> None:
        super().__init__(message)


class RolloutError(LeapstackError):
    """
    Rollout executor error.

    Raised when rollouts are submitted to an executor that is not open.
    """

    pass


class ConfigError(LeapstackError):
    """
    Configuration file error.

    Raised when a config file cannot be parsed or fails validation. The
    field attribute carries the dotted path of the offending entry.
    """

    def __init__(
        self,
        message: str,
        *,
        field: str | None = None,
        line: int | None = None,
        path: str | None = None,
    ) -> None:
        super().__init__(message)
        self.field = field
        self.line = line
        self.path = path

    def __str__(self) -> str:
        parts = [super().__str__()]
        if self.path:
            parts.append(f"path={self.path}")
        if self.line is not None:
            parts.append(f"line={self.line}")
        if self.field:
            parts.append(f"field={self.field}")
        return " ".join(parts) if len(parts) > 1 else parts[0]


class CheckpointError(LeapstackError):
    """
    Policy checkpoint error.

    Raised when a checkpoint cannot be read or does not fit the current
    configuration.
    """

    pass


class ConfigHashMismatchError(CheckpointError):
    """Checkpoint was produced under a different episode configuration."""

    def __init__(self, expected: str, received: str) -> None:
        self.expected = expected
        self.received = received
        super().__init__(
            f"Checkpoint config hash {received[:12]} does not match current config {expected[:12]}"
        )


class UnknownFigureError(LeapstackError):
    """No figure exporter is registered under the requested key."""

    def __init__(self, key: str) -> None:
        self.key = key
        super().__init__(f"Unknown figure key: {key!r}")


class ExitCode:
    """Process exit codes used by the command-line interface."""

    OK: Final[int] = 0
    CONFIG_ERROR: Final[int] = 2
    OUTPUT_ERROR: Final[int] = 3
    CHECKPOINT_MISMATCH: Final[int] = 4
    UNKNOWN_FIGURE: Final[int] = 5


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception to the CLI exit code that reports it.

    Args:
        error: Exception raised by a command.

    Returns:
        Exit code; 1 for errors without a dedicated code.
    """
    if isinstance(error, ConfigError):
        return ExitCode.CONFIG_ERROR
    if isinstance(error, CheckpointError):
        return ExitCode.CHECKPOINT_MISMATCH
    if isinstance(error, UnknownFigureError):
        return ExitCode.UNKNOWN_FIGURE
    if isinstance(error, OSError):
        return ExitCode.OUTPUT_ERROR
    return 1
