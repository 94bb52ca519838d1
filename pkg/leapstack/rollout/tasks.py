"""
Rollout work items exchanged with executors.

Tasks and results are plain picklable values so they can cross process
boundaries; run_rollout is a module-level function for the same reason.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from leapstack.config import LeapConfig
from leapstack.learning.env import EpisodeSummary, JumpEnv, TerminationReason, run_episode
from leapstack.learning.policy import PolicyParams, forward
from leapstack.models.state import FloatArray


@dataclass(frozen=True, eq=False)
class RolloutTask:
    """
    One episode to run.

    Attributes:
        index: Position of the task in its batch.
        weights: Flat policy parameter vector.
        obs_mean: Observation mean snapshot.
        obs_std: Observation std snapshot.
        config: Episode configuration (command mode included).
        seed: Episode seed.
    """

    index: int
    weights: FloatArray
    obs_mean: FloatArray
    obs_std: FloatArray
    config: LeapConfig
    seed: int

    def params(self) -> PolicyParams:
        return PolicyParams.from_flat(
            self.weights, self.obs_mean, self.obs_std, self.config.policy.hidden_size
        )


@dataclass(frozen=True, eq=False)
class RolloutResult:
    """
    Outcome of one task.

    obs_mean, obs_var and obs_count are the moments of the observations the
    policy saw, used to update running normalization statistics.
    """

    index: int
    episode_return: float
    policy_steps: int
    jumps_completed: int
    termination_reason: TerminationReason | None
    obs_mean: FloatArray
    obs_var: FloatArray
    obs_count: int
    summary: EpisodeSummary | None = field(default=None)


def run_rollout(task: RolloutTask) -> RolloutResult:
    """Run the task's episode with its deterministic policy."""
    params = task.params()
    env = JumpEnv(task.config)
    summary, observations = run_episode(env, lambda obs: forward(params, obs), seed=task.seed)
    return RolloutResult(
        index=task.index,
        episode_return=summary.episode_return,
        policy_steps=summary.policy_steps,
        jumps_completed=summary.jumps_completed,
        termination_reason=summary.termination_reason,
        obs_mean=observations.mean(axis=0),
        obs_var=observations.var(axis=0),
        obs_count=int(observations.shape[0]),
        summary=summary,
    )

