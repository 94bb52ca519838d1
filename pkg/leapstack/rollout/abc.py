"""
Abstract rollout executor.

Executors run batches of independent episodes for the trainer. Whatever
order the episodes finish in, results come back in task order, so the
trainer's reductions do not depend on the number of workers.

Implementations:
- ProcessPoolRolloutExecutor: concurrent.futures process pool
- InlineRolloutExecutor: sequential, in-process
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from typing import TYPE_CHECKING

from leapstack.rollout.tasks import RolloutResult, RolloutTask, run_rollout

if TYPE_CHECKING:
    from types import TracebackType

RolloutFn = Callable[[RolloutTask], RolloutResult]
"""Function executing one task; must be picklable for process pools."""


class AbstractRolloutExecutor(ABC):
    """
    Abstract base class for rollout executors.

    Executors support the async context manager protocol:

        async with ProcessPoolRolloutExecutor(workers=8) as executor:
            results = await executor.run(tasks)

    Args:
        rollout_fn: Task runner; defaults to run_rollout.
    """

    def __init__(self, rollout_fn: RolloutFn = run_rollout) -> None:
        self._rollout_fn = rollout_fn

    @property
    @abstractmethod
    def is_open(self) -> bool:
        """Whether the executor accepts tasks."""
        ...

    @property
    @abstractmethod
    def workers(self) -> int:
        """Number of episodes that can run concurrently."""
        ...

    @abstractmethod
    async def open(self) -> None:
        """
        Start the executor's workers.

        Raises:
            RolloutError: If the executor is already open.
        """
        ...

    @abstractmethod
    async def close(self) -> None:
        """Stop the workers. Safe to call multiple times."""
        ...

    @abstractmethod
    async def run(self, tasks: Sequence[RolloutTask]) -> list[RolloutResult]:
        """
        Execute a batch of tasks.

        Args:
            tasks: Independent rollout tasks.

        Returns:
            One result per task, in task order.

        Raises:
            RolloutError: If the executor is not open.
        """
        ...

    async def __aenter__(self) -> AbstractRolloutExecutor:
        """Async context manager entry - opens the executor."""
        await self.open()
        return self

    async def __aexit__(
        self,
        exc_type: type[BaseException] | None,
        exc_val: BaseException | None,
        exc_tb: TracebackType | None,
    ) -> None:
        """Async context manager exit - closes the executor."""
        await self.close()
