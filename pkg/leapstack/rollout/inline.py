"""
In-process rollout executor.

Runs tasks one after another in the calling process, yielding to the event
loop between episodes. Used for single-worker runs and in tests, where
rollout_fn can be replaced by a cheap surrogate.
"""

from __future__ import annotations

import asyncio
from collections.abc import Sequence

from leapstack.exceptions import RolloutError
from leapstack.rollout.abc import AbstractRolloutExecutor, RolloutFn
from leapstack.rollout.tasks import RolloutResult, RolloutTask, run_rollout


class InlineRolloutExecutor(AbstractRolloutExecutor):
    """Sequential executor."""

    def __init__(self, rollout_fn: RolloutFn = run_rollout) -> None:
        super().__init__(rollout_fn)
        self._is_open = False

    @property
    def is_open(self) -> bool:
        return self._is_open

    @property
    def workers(self) -> int:
        return 1

    async def open(self) -> None:
        if self._is_open:
            raise RolloutError("Executor already open")
        self._is_open = True

    async def close(self) -> None:
        self._is_open = False

    async def run(self, tasks: Sequence[RolloutTask]) -> list[RolloutResult]:
        if not self._is_open:
            raise RolloutError("Executor not open")
        results = []
        for task in tasks:
            results.append(self._rollout_fn(task))
            await asyncio.sleep(0)
        return results

