"""
Residual policy, jumping environment and ARS trainer.

The trainer lives in leapstack.learning.ars; it is not re-exported here
because it depends on leapstack.rollout, which in turn runs this package's
environment.
"""

from leapstack.learning.env import (
    EpisodeSummary,
    JumpEnv,
    RewardTerms,
    TerminationReason,
    check_termination,
    compute_reward,
    run_episode,
)
from leapstack.learning.policy import (
    Observation,
    PolicyCheckpoint,
    PolicyParams,
    compose,
    forward,
    load_checkpoint,
    observe,
    save_checkpoint,
)

__all__ = [
    "EpisodeSummary",
    "JumpEnv",
    "Observation",
    "PolicyCheckpoint",
    "PolicyParams",
    "RewardTerms",
    "TerminationReason",
    "check_termination",
    "compose",
    "compute_reward",
    "forward",
    "load_checkpoint",
    "observe",
    "run_episode",
    "save_checkpoint",
]
