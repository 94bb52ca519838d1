"""Tests for rollout executors."""

import gc
import weakref

import numpy as np
import pytest

from leapstack.config import LeapConfig
from leapstack.exceptions import RolloutError
from leapstack.learning.ars import ArsTrainer
from leapstack.learning.policy import OBS_DIM, PolicyParams
from leapstack.rollout import (
    InlineRolloutExecutor,
    ProcessPoolRolloutExecutor,
    RolloutResult,
    RolloutTask,
    create_executor,
)


def echo_rollout(task: RolloutTask) -> RolloutResult:
    """Return the task seed as the episode return."""
    return RolloutResult(
        index=task.index,
        episode_return=float(task.seed),
        policy_steps=0,
        jumps_completed=0,
        termination_reason=None,
        obs_mean=np.zeros(OBS_DIM),
        obs_var=np.ones(OBS_DIM),
        obs_count=0,
    )


def make_tasks(count: int) -> list[RolloutTask]:
    config = LeapConfig()
    params = PolicyParams.zeros(config.policy.hidden_size)
    return [
        RolloutTask(
            index=i,
            weights=params.flatten(),
            obs_mean=params.obs_mean,
            obs_std=params.obs_std,
            config=config,
            seed=100 - i,
        )
        for i in range(count)
    ]


class TestRolloutTask:
    """Tests for task values."""

    def test_params(self):
        """Test a task rebuilds its policy parameters."""
        task = make_tasks(1)[0]
        params = task.params()
        assert params.hidden_size == 256
        assert params.size == 9222
        assert np.array_equal(params.flatten(), task.weights)


class TestInlineRolloutExecutor:
    """Tests for the in-process executor."""

    async def test_context_manager(self):
        """Test open/close through async with."""
        executor = InlineRolloutExecutor(echo_rollout)
        assert not executor.is_open
        async with executor:
            assert executor.is_open
            assert executor.workers == 1
        assert not executor.is_open

    async def test_run_not_open(self):
        """Test running on a closed executor."""
        with pytest.raises(RolloutError):
            await InlineRolloutExecutor(echo_rollout).run(make_tasks(1))

    async def test_open_twice(self):
        """Test opening an open executor."""
        async with InlineRolloutExecutor(echo_rollout) as executor:
            with pytest.raises(RolloutError):
                await executor.open()

    async def test_close_idempotent(self):
        """Test close can be called repeatedly."""
        executor = InlineRolloutExecutor(echo_rollout)
        await executor.open()
        await executor.close()
        await executor.close()
        assert not executor.is_open

    async def test_task_order(self):
        """Test results come back in task order."""
        async with InlineRolloutExecutor(echo_rollout) as executor:
            results = await executor.run(make_tasks(5))
        assert [r.index for r in results] == [0, 1, 2, 3, 4]
        assert [r.episode_return for r in results] == [100.0, 99.0, 98.0, 97.0, 96.0]

    async def test_tasks_not_retained(self):
        """Test finished tasks and their weights can be freed."""
        tasks = make_tasks(3)
        refs = [weakref.ref(task.weights) for task in tasks]
        async with InlineRolloutExecutor(echo_rollout) as executor:
            await executor.run(tasks)
            del tasks
            gc.collect()
            assert all(ref() is None for ref in refs)

    async def test_empty_batch(self):
        """Test an empty batch returns no results."""
        async with InlineRolloutExecutor(echo_rollout) as executor:
            assert await executor.run([]) == []


class TestProcessPoolRolloutExecutor:
    """Tests for the process-pool executor."""

    def test_invalid_workers(self):
        """Test zero workers is rejected."""
        with pytest.raises(ValueError):
            ProcessPoolRolloutExecutor(workers=0)

    async def test_run_not_open(self):
        """Test running before open."""
        with pytest.raises(RolloutError):
            await ProcessPoolRolloutExecutor(workers=2, rollout_fn=echo_rollout).run(make_tasks(1))

    @pytest.mark.slow
    async def test_task_order(self):
        """Test results match the inline executor, in task order."""
        tasks = make_tasks(6)
        async with ProcessPoolRolloutExecutor(workers=2, rollout_fn=echo_rollout) as executor:
            assert executor.workers == 2
            pooled = await executor.run(tasks)
        async with InlineRolloutExecutor(echo_rollout) as executor:
            inline = await executor.run(tasks)
        assert [r.index for r in pooled] == [r.index for r in inline]
        assert [r.episode_return for r in pooled] == [r.episode_return for r in inline]


@pytest.mark.slow
class TestWorkerCountDeterminism:
    """Tests that real episodes do not depend on how many workers run them."""

    @pytest.fixture
    def tiny_config(self, short_config) -> LeapConfig:
        ars = short_config.ars.model_copy(
            update={
                "num_directions": 2,
                "top_directions": 1,
                "iterations": 1,
                "eval_interval": 1,
                "eval_episodes": 2,
                "seed": 3,
            }
        )
        return short_config.model_copy(update={"ars": ars})

    async def test_rollout_results(self, tiny_config):
        """Test real rollouts give bit-identical results inline and pooled."""
        rng = np.random.default_rng(0)
        zeros = PolicyParams.zeros(tiny_config.policy.hidden_size)
        params = zeros.with_flat(rng.normal(0.0, 0.05, zeros.size))
        tasks = [
            RolloutTask(i, params.flatten(), params.obs_mean, params.obs_std, tiny_config, 50 + i)
            for i in range(3)
        ]
        async with InlineRolloutExecutor() as executor:
            inline = await executor.run(tasks)
        async with ProcessPoolRolloutExecutor(workers=3) as executor:
            pooled = await executor.run(tasks)
        for a, b in zip(inline, pooled, strict=True):
            assert a.episode_return == b.episode_return
            assert a.policy_steps == b.policy_steps
            assert np.array_equal(a.obs_mean, b.obs_mean)
            assert np.array_equal(a.obs_var, b.obs_var)

    async def test_learning_curve(self, tiny_config):
        """Test one and several workers train to the same curve and parameters."""
        runs = []
        for executor in (InlineRolloutExecutor(), ProcessPoolRolloutExecutor(workers=2)):
            async with executor:
                params, curve = await ArsTrainer(tiny_config, executor).train()
            rows = [(p.iteration, p.episodes, p.mean_return, p.std_return) for p in curve]
            runs.append((params.flatten(), rows))
        assert np.array_equal(runs[0][0], runs[1][0])
        assert runs[0][1] == runs[1][1]

class TestCreateExecutor:
    """Tests for the executor factory."""

    def test_single_worker(self):
        """Test one worker gives the inline executor."""
        assert isinstance(create_executor(1, echo_rollout), InlineRolloutExecutor)

    def test_many_workers(self):
        """Test several workers give a process pool."""
        executor = create_executor(3, echo_rollout)
        assert isinstance(executor, ProcessPoolRolloutExecutor)
        assert executor.workers == 3
