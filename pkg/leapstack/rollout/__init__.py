"""Rollout executors: run batches of episodes in-process or on a process pool."""

from leapstack.rollout.abc import AbstractRolloutExecutor, RolloutFn
from leapstack.rollout.inline import InlineRolloutExecutor
from leapstack.rollout.process_pool import ProcessPoolRolloutExecutor
from leapstack.rollout.tasks import RolloutResult, RolloutTask, run_rollout


def create_executor(workers: int, rollout_fn: RolloutFn = run_rollout) -> AbstractRolloutExecutor:
    """Inline executor for one worker, process pool otherwise."""
    if workers <= 1:
        return InlineRolloutExecutor(rollout_fn)
    return ProcessPoolRolloutExecutor(workers, rollout_fn)


__all__ = [
    "AbstractRolloutExecutor",
    "InlineRolloutExecutor",
    "ProcessPoolRolloutExecutor",
    "RolloutFn",
    "RolloutResult",
    "RolloutTask",
    "create_executor",
    "run_rollout",
]
