"""
Process-pool rollout executor.

Episodes are CPU bound, so each worker is a separate process. The pool is
driven through asyncio: every task is submitted with run_in_executor and
the futures are gathered in submission order.
"""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor

from leapstack.exceptions import RolloutError
from leapstack.rollout.abc import AbstractRolloutExecutor, RolloutFn
from leapstack.rollout.tasks import RolloutResult, RolloutTask, run_rollout

logger = logging.getLogger(__name__)


class ProcessPoolRolloutExecutor(AbstractRolloutExecutor):
    """
    Runs rollouts on a pool of worker processes.

    Args:
        workers: Number of worker processes (>= 1).
        rollout_fn: Picklable task runner.

    Example:
        >>> async with ProcessPoolRolloutExecutor(workers=4) as executor:
        ...     results = await executor.run(tasks)
    """

    def __init__(self, workers: int = 1, rollout_fn: RolloutFn = run_rollout) -> None:
        if workers < 1:
            raise ValueError("workers must be >= 1")
        super().__init__(rollout_fn)
        self._workers = workers
        self._pool: ProcessPoolExecutor | None = None

    @property
    def is_open(self) -> bool:
        return self._pool is not None

    @property
    def workers(self) -> int:
        return self._workers

    async def open(self) -> None:
        if self._pool is not None:
            raise RolloutError("Executor already open")
        self._pool = ProcessPoolExecutor(max_workers=self._workers)
        logger.debug("Started %d rollout workers", self._workers)

    async def close(self) -> None:
        if self._pool is None:
            return
        pool, self._pool = self._pool, None
        await asyncio.get_running_loop().run_in_executor(None, pool.shutdown)
        logger.debug("Stopped rollout workers")

    async def run(self, tasks: Sequence[RolloutTask]) -> list[RolloutResult]:
        if self._pool is None:
            raise RolloutError("Executor not open")
        loop = asyncio.get_running_loop()
        futures = [loop.run_in_executor(self._pool, self._rollout_fn, task) for task in tasks]
        return list(await asyncio.gather(*futures))
