"""
Augmented Random Search over the residual policy weights.

Each iteration samples N Gaussian directions δ_k over the flat weight
vector, runs one episode at θ + ν·δ_k and one at θ − ν·δ_k, keeps the b
directions with the best max(r⁺, r⁻) and moves

    θ ← θ + α / (b·σ_R) · Σ_k (r⁺_k − r⁻_k)·δ_k

where σ_R is the standard deviation of the 2b kept returns. Observation
mean/std are tracked with a running estimate that every rollout
contributes to; they are frozen into the parameters between iterations and
are never perturbed.

All reductions run in direction order over results that the executor
returns in task order, so the outcome does not depend on the worker count.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Final

import numpy as np
from pydantic import BaseModel, ConfigDict
from stable_baselines3.common.running_mean_std import RunningMeanStd

from leapstack.config import LeapConfig
from leapstack.constants import LogSchema
from leapstack.export.tables import write_table
from leapstack.learning.policy import OBS_DIM, PolicyParams, save_checkpoint
from leapstack.models.state import FloatArray
from leapstack.rollout import AbstractRolloutExecutor, RolloutResult, RolloutTask

logger = logging.getLogger(__name__)

SIGMA_FLOOR: Final[float] = 1e-6
"""Lower bound on the return standard deviation σ_R."""

EVAL_SEED_OFFSET: Final[int] = 1_000_000_000
"""Evaluation seeds start here so they never coincide with training seeds."""

LEARNING_CURVE_COLUMNS: Final[tuple[str, ...]] = (
    "iteration",
    "episodes",
    "mean_return",
    "std_return",
    "wall_clock_s",
)


def sample_directions(rng: np.random.Generator, num_directions: int, size: int) -> FloatArray:
    """Unit Gaussian directions, one per row."""
    return np.asarray(rng.standard_normal((num_directions, size)))


def select_top(r_plus: FloatArray, r_minus: FloatArray, top: int) -> FloatArray:
    """
    Indices of the top directions by max(r⁺, r⁻), in ascending index order.

    Ties keep the lower index.
    """
    scores = np.maximum(r_plus, r_minus)
    order = np.argsort(-scores, kind="stable")[:top]
    return np.sort(order)


@dataclass(frozen=True)
class UpdateStats:
    """Diagnostics of one parameter update."""

    selected: tuple[int, ...]
    reward_std: float
    update_norm: float


def ars_update(
    theta: FloatArray,
    deltas: FloatArray,
    r_plus: FloatArray,
    r_minus: FloatArray,
    step_size: float,
    top_directions: int,
) -> tuple[FloatArray, UpdateStats]:
    """
    One ARS V2-t parameter update.

    Args:
        theta: Current flat parameters.
        deltas: N x P directions.
        r_plus: Returns at θ + ν·δ_k.
        r_minus: Returns at θ − ν·δ_k.
        step_size: α.
        top_directions: b <= N.

    Returns:
        (updated θ, stats)

    Example:
        >>> ars_update(np.zeros(1), np.ones((1, 1)), np.array([1.0]),
        ...            np.array([1.0]), 0.1, 1)[0].tolist()
        [0.0]
    """
    plus = np.asarray(r_plus, dtype=np.float64)
    minus = np.asarray(r_minus, dtype=np.float64)
    if not 1 <= top_directions <= plus.shape[0]:
        raise ValueError("top_directions must be in [1, num_directions]")
    selected = select_top(plus, minus, top_directions)
    sigma = max(float(np.std(np.concatenate([plus[selected], minus[selected]]))), SIGMA_FLOOR)
    step = np.zeros_like(np.asarray(theta, dtype=np.float64))
    for k in selected:
        step = step + (plus[k] - minus[k]) * deltas[k]
    step = step * (step_size / (top_directions * sigma))
    return np.asarray(theta + step), UpdateStats(
        selected=tuple(int(k) for k in selected),
        reward_std=sigma,
        update_norm=float(np.linalg.norm(step)),
    )


@dataclass(frozen=True)
class IterationStats:
    """Summary of one training iteration."""

    iteration: int
    episodes: int
    mean_return: float
    max_return: float
    reward_std: float
    update_norm: float
    wall_clock_s: float


@dataclass(frozen=True)
class CurvePoint:
    """One learning-curve row."""

    iteration: int
    episodes: int
    mean_return: float
    std_return: float
    wall_clock_s: float

    def row(self) -> dict[str, float]:
        return {
            "iteration": self.iteration,
            "episodes": self.episodes,
            "mean_return": self.mean_return,
            "std_return": self.std_return,
            "wall_clock_s": self.wall_clock_s,
        }


def write_learning_curve(path: str | Path, curve: list[CurvePoint]) -> Path:
    return write_table(
        path, LogSchema.LEARNING_CURVE, LEARNING_CURVE_COLUMNS, [p.row() for p in curve]
    )


class EvalStats(BaseModel):
    """
    Deterministic evaluation of one policy.

    An episode is a success when it finishes every jump without early
    termination.
    """

    model_config = ConfigDict(frozen=True)

    episodes: int
    mean_return: float
    std_return: float
    success_rate: float
    returns: list[float]
    jumps_completed: list[int]
    landing_errors: list[list[float]]
    flight_times: list[list[float]]
    yaw_progress: list[list[float]]
    peak_yaw_rate: float

    @property
    def mean_flight_time(self) -> float:
        times = [t for episode in self.flight_times for t in episode]
        return float(np.mean(times)) if times else 0.0

    @property
    def mean_landing_error(self) -> float:
        errors = [e for episode in self.landing_errors for e in episode]
        return float(np.mean(errors)) if errors else 0.0


def summarize(results: list[RolloutResult], max_jumps: int) -> EvalStats:
    """Aggregate evaluation rollouts."""
    if not results:
        raise ValueError("need at least one rollout")
    returns = [r.episode_return for r in results]
    summaries = [r.summary for r in results if r.summary is not None]
    successes = sum(
        r.termination_reason is None and r.jumps_completed >= max_jumps for r in results
    )
    return EvalStats(
        episodes=len(results),
        mean_return=float(np.mean(returns)),
        std_return=float(np.std(returns)),
        success_rate=successes / len(results),
        returns=returns,
        jumps_completed=[r.jumps_completed for r in results],
        landing_errors=[s.landing_errors for s in summaries],
        flight_times=[s.flight_times for s in summaries],
        yaw_progress=[s.yaw_progress for s in summaries],
        peak_yaw_rate=max((s.peak_yaw_rate for s in summaries), default=0.0),
    )


async def evaluate_policy(
    executor: AbstractRolloutExecutor,
    params: PolicyParams,
    config: LeapConfig,
    n_episodes: int,
    seed: int = 0,
) -> EvalStats:
    """
    Run n deterministic episodes of params (no exploration noise).

    Raises:
        ValueError: If n_episodes < 1.
    """
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    weights = params.flatten()
    tasks = [
        RolloutTask(
            index=i,
            weights=weights,
            obs_mean=params.obs_mean,
            obs_std=params.obs_std,
            config=config,
            seed=seed + i,
        )
        for i in range(n_episodes)
    ]
    results = await executor.run(tasks)
    return summarize(results, config.env.max_jumps)


class ArsTrainer:
    """
    Owns the policy parameters, observation statistics and random stream.

    Args:
        config: Full configuration (ars block plus the episode blocks).
        executor: Open rollout executor.
        out_dir: Where checkpoints and the learning curve go; None keeps
            everything in memory.
        initial_params: Starting point; defaults to PolicyParams.initial.

    Example:
        >>> async with InlineRolloutExecutor() as executor:
        ...     trainer = ArsTrainer(config, executor)
        ...     params, curve = await trainer.train()
    """

    def __init__(
        self,
        config: LeapConfig,
        executor: AbstractRolloutExecutor,
        out_dir: str | Path | None = None,
        initial_params: PolicyParams | None = None,
    ) -> None:
        self._config = config
        self._executor = executor
        self._out_dir = Path(out_dir) if out_dir is not None else None
        self._rng = np.random.default_rng(config.ars.seed)
        self._params = initial_params or PolicyParams.initial(
            self._rng, config.policy.hidden_size, config.policy.init_std
        )
        self._obs_rms = RunningMeanStd(shape=(OBS_DIM,))
        self._iteration = 0
        self._episodes = 0

    @property
    def params(self) -> PolicyParams:
        return self._params

    @property
    def iteration(self) -> int:
        return self._iteration

    @property
    def episodes(self) -> int:
        """Training episodes consumed so far."""
        return self._episodes

    def _seeds(self, count: int) -> list[int]:
        base = self._config.ars.seed * 1_000_000 + self._episodes
        return [base + i for i in range(count)]

    def _merge_stats(self, results: list[RolloutResult]) -> None:
        for result in results:
            if result.obs_count > 0:
                self._obs_rms.update_from_moments(
                    result.obs_mean, result.obs_var, result.obs_count
                )

    async def step(self) -> IterationStats:
        """Run one ARS iteration and update the parameters."""
        ars = self._config.ars
        started = time.perf_counter()
        theta = self._params.flatten()
        deltas = sample_directions(self._rng, ars.num_directions, theta.shape[0])
        seeds = self._seeds(2 * ars.num_directions)

        tasks = []
        for k in range(ars.num_directions):
            for sign in (1.0, -1.0):
                index = len(tasks)
                tasks.append(
                    RolloutTask(
                        index=index,
                        weights=theta + sign * ars.exploration_std * deltas[k],
                        obs_mean=self._params.obs_mean,
                        obs_std=self._params.obs_std,
                        config=self._config,
                        seed=seeds[index],
                    )
                )
        results = await self._executor.run(tasks)
        returns = np.array([r.episode_return for r in results])
        r_plus, r_minus = returns[0::2], returns[1::2]

        new_theta, update = ars_update(
            theta, deltas, r_plus, r_minus, ars.step_size, ars.top_directions
        )
        self._merge_stats(results)
        self._params = PolicyParams.from_flat(
            new_theta,
            np.asarray(self._obs_rms.mean),
            np.sqrt(np.asarray(self._obs_rms.var)),
            self._params.hidden_size,
            self._params.action_dim,
        )
        self._iteration += 1
        self._episodes += len(tasks)
        stats = IterationStats(
            iteration=self._iteration,
            episodes=self._episodes,
            mean_return=float(returns.mean()),
            max_return=float(returns.max()),
            reward_std=update.reward_std,
            update_norm=update.update_norm,
            wall_clock_s=time.perf_counter() - started,
        )
        logger.info(
            "Iteration %d: mean return %.3f, max %.3f, sigma_R %.3f, |step| %.2e",
            stats.iteration,
            stats.mean_return,
            stats.max_return,
            stats.reward_std,
            stats.update_norm,
        )
        return stats

    async def evaluate(
        self,
        params: PolicyParams | None = None,
        n_episodes: int | None = None,
        seed: int | None = None,
    ) -> EvalStats:
        """Deterministic evaluation; defaults to the current parameters."""
        return await evaluate_policy(
            self._executor,
            params or self._params,
            self._config,
            n_episodes or self._config.ars.eval_episodes,
            EVAL_SEED_OFFSET + (self._config.ars.seed if seed is None else seed),
        )

    async def _record(self, curve: list[CurvePoint], started: float) -> None:
        stats = await self.evaluate()
        point = CurvePoint(
            iteration=self._iteration,
            episodes=self._episodes,
            mean_return=stats.mean_return,
            std_return=stats.std_return,
            wall_clock_s=time.perf_counter() - started,
        )
        curve.append(point)
        logger.info(
            "Evaluation at iteration %d: return %.3f +/- %.3f, success %.0f%%",
            point.iteration,
            point.mean_return,
            point.std_return,
            100.0 * stats.success_rate,
        )
        if self._out_dir is not None:
            write_learning_curve(self._out_dir / "learning_curve.csv", curve)
            save_checkpoint(
                self._out_dir / f"checkpoint_{self._iteration:05d}.json",
                self._params,
                self._config,
                self._iteration,
            )

    async def train(self) -> tuple[PolicyParams, list[CurvePoint]]:
        """
        Run the configured number of iterations.

        The current parameters are evaluated before the first iteration,
        every eval_interval iterations and after the last one.

        Returns:
            (final parameters, learning curve)
        """
        ars = self._config.ars
        started = time.perf_counter()
        curve: list[CurvePoint] = []
        await self._record(curve, started)
        for i in range(1, ars.iterations + 1):
            await self.step()
            if i % ars.eval_interval == 0 or i == ars.iterations:
                await self._record(curve, started)
        if self._out_dir is not None:
            save_checkpoint(
                self._out_dir / "policy.json", self._params, self._config, self._iteration
            )
        return self._params, curve
