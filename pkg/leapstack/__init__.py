"""
leapstack - control and learning toolkit for quadruped jumping.

A pronking gait drives sequences of targeted jumps: a stance controller picks
the base acceleration that produces the required lift-off velocity, a
whole-body controller turns it into motor commands, and a residual policy
trained with augmented random search adjusts the command. Everything runs on
a lumped-mass rigid-body simulator.

Example:
    >>> from leapstack import JumpEnv, load_config, run_episode
    >>>
    >>> env = JumpEnv(load_config("configs/default.toml"))
    >>> summary, _ = run_episode(env, seed=0)
    >>> print(summary.jumps_completed, summary.mean_flight_time)
"""

from leapstack.config import CommandMode, LeapConfig, config_hash, load_config, write_config
from leapstack.exceptions import (
    CheckpointError,
    ConfigError,
    ConfigHashMismatchError,
    EpisodeFinishedError,
    KinematicsError,
    LeapstackError,
    NonFiniteStateError,
    OutOfReachError,
    RolloutError,
    SimulationError,
    UnknownFigureError,
)
from leapstack.learning import (
    EpisodeSummary,
    JumpEnv,
    PolicyParams,
    TerminationReason,
    load_checkpoint,
    run_episode,
    save_checkpoint,
)
from leapstack.models import RigidBodyState, RobotModel, StanceCommand
from leapstack.sim import Simulator

__version__ = "0.1.0"
__all__ = [
    # Config
    "CommandMode",
    "LeapConfig",
    "config_hash",
    "load_config",
    "write_config",
    # Simulation
    "RigidBodyState",
    "RobotModel",
    "Simulator",
    "StanceCommand",
    # Learning
    "EpisodeSummary",
    "JumpEnv",
    "PolicyParams",
    "TerminationReason",
    "load_checkpoint",
    "run_episode",
    "save_checkpoint",
    # Exceptions
    "LeapstackError",
    "KinematicsError",
    "OutOfReachError",
    "SimulationError",
    "NonFiniteStateError",
    "EpisodeFinishedError",
    "RolloutError",
    "ConfigError",
    "CheckpointError",
    "ConfigHashMismatchError",
    "UnknownFigureError",
    # Version
    "__version__",
]
