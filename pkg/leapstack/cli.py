"""
Command-line interface.

Commands:
    train           run ARS and write the learning curve, checkpoints and
                    the resolved config snapshot
    rollout         one deterministic episode; trajectory CSV + summary JSON
    evaluate        several deterministic episodes; EvalStats JSON
    export-figures  plot-ready data for one figure

Exit codes: 0 success, 2 config error, 3 unwritable output, 4 checkpoint or
config-hash mismatch, 5 unknown figure key.

The worker count is taken from --workers, else the LEAPSTACK_THREADS
environment variable, else the config file.
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Final

from leapstack import __version__
from leapstack.config import CommandMode, LeapConfig, load_config, write_config
from leapstack.exceptions import ConfigError, ExitCode, LeapstackError, exit_code_for
from leapstack.export.figures import create_default_registry
from leapstack.learning.ars import ArsTrainer, evaluate_policy
from leapstack.learning.env import JumpEnv, run_episode
from leapstack.learning.policy import PolicyParams, forward, load_checkpoint
from leapstack.learning.presets import parse_task
from leapstack.rollout import create_executor

logger = logging.getLogger("leapstack")

THREADS_ENV: Final[str] = "LEAPSTACK_THREADS"


def _prepare_out(path: str | Path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def resolve_workers(flag: int | None, config: LeapConfig) -> int:
    """
    Worker count from the flag, the environment, or the config.

    Raises:
        ConfigError: If LEAPSTACK_THREADS is not a positive integer.
    """
    if flag is not None:
        if flag < 1:
            raise ConfigError("--workers must be >= 1", field="workers")
        return flag
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            workers = int(value)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer", field=THREADS_ENV) from None
        if workers < 1:
            raise ConfigError(f"{THREADS_ENV} must be >= 1", field=THREADS_ENV)
        return workers
    return config.ars.rollout_workers


def _with_overrides(config: LeapConfig, args: argparse.Namespace) -> LeapConfig:
    """Apply --seed and --workers, which do not change the config hash."""
    ars = config.ars.model_copy(
        update={
            "seed": config.ars.seed if args.seed is None else args.seed,
            "rollout_workers": resolve_workers(args.workers, config),
        }
    )
    return config.model_copy(update={"ars": ars})


def resolve_policy(
    config: LeapConfig, checkpoint: str | None, mode: str | None, task: str | None
) -> tuple[PolicyParams, LeapConfig]:
    """
    Policy parameters and episode config for rollout/evaluate.

    A checkpoint is verified against the config before the mode and task
    overrides are applied. Without a checkpoint the residual is zero.

    Raises:
        CheckpointError: If the checkpoint is unreadable or its hash differs.
        ConfigError: If the task preset is invalid.
    """
    if checkpoint is not None:
        params, _ = load_checkpoint(checkpoint, config)
    else:
        params = PolicyParams.zeros(config.policy.hidden_size)
    env = config.env
    updates: dict[str, object] = {}
    if mode is not None:
        updates["command_mode"] = CommandMode(mode)
    if task is not None:
        updates["jump_sequence"] = parse_task(task, env.jump_sequence)
    if updates:
        config = config.model_copy(update={"env": env.model_copy(update=updates)})
    return params, config


async def _train(config: LeapConfig, out: Path) -> None:
    async with create_executor(config.ars.rollout_workers) as executor:
        trainer = ArsTrainer(config, executor, out_dir=out)
        await trainer.train()


def cmd_train(args: argparse.Namespace) -> int:
    config = _with_overrides(load_config(args.config), args)
    out = _prepare_out(args.out)
    write_config(config, out / "config.toml")
    logger.info(
        "Training for %d iterations with %d workers into %s",
        config.ars.iterations,
        config.ars.rollout_workers,
        out,
    )
    asyncio.run(_train(config, out))
    return ExitCode.OK


def cmd_rollout(args: argparse.Namespace) -> int:
    base = _with_overrides(load_config(args.config), args)
    params, config = resolve_policy(base, args.checkpoint, args.mode, args.task)
    out = _prepare_out(args.out)
    env = JumpEnv(config, record=True)
    summary, _ = run_episode(env, lambda obs: forward(params, obs), seed=config.ars.seed)
    assert env.trajectory is not None
    env.trajectory.write(out / "trajectory.csv")
    (out / "summary.json").write_text(summary.model_dump_json(indent=2), encoding="utf-8")
    logger.info(
        "Rollout (%s): %d jumps, return %.3f, mean flight %.3f s, peak yaw rate %.2f rad/s",
        config.env.command_mode,
        summary.jumps_completed,
        summary.episode_return,
        summary.mean_flight_time,
        summary.peak_yaw_rate,
    )
    return ExitCode.OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    base = _with_overrides(load_config(args.config), args)
    params, config = resolve_policy(base, args.checkpoint, args.mode, args.task)
    out = Path(args.out) if args.out else None
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
    episodes = args.episodes or config.ars.eval_episodes

    async def run() -> str:
        async with create_executor(config.ars.rollout_workers) as executor:
            stats = await evaluate_policy(executor, params, config, episodes, config.ars.seed)
        return stats.model_dump_json(indent=2)

    report = asyncio.run(run())
    if out is not None:
        out.write_text(report, encoding="utf-8")
    sys.stdout.write(report + "\n")
    return ExitCode.OK


def cmd_export_figures(args: argparse.Namespace) -> int:
    exporter = create_default_registry().get(args.which)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    exporter.export(args.inputs, out)
    return ExitCode.OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file (defaults apply if omitted)")
    parser.add_argument("--seed", type=int, help="override ars.seed")
    parser.add_argument("--workers", type=int, help=f"rollout workers (env: {THREADS_ENV})")


def _add_policy(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--checkpoint", help="policy checkpoint JSON; zero residual if omitted")
    parser.add_argument(
        "--mode",
        choices=[m.value for m in CommandMode],
        help="command mode override (ablations)",
    )
    parser.add_argument("--task", help="task preset, e.g. forward, jump_turn:90degx5")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leapstack",
        description="Quadruped jump control: training, rollouts and figure data.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="train the residual policy with ARS")
    _add_common(train)
    train.add_argument("--out", required=True, help="output directory")
    train.set_defaults(handler=cmd_train)

    rollout = commands.add_parser("rollout", help="run one episode and log it")
    _add_common(rollout)
    _add_policy(rollout)
    rollout.add_argument("--out", required=True, help="output directory")
    rollout.set_defaults(handler=cmd_rollout)

    evaluate = commands.add_parser("evaluate", help="deterministic evaluation episodes")
    _add_common(evaluate)
    _add_policy(evaluate)
    evaluate.add_argument("--episodes", type=int, help="number of episodes")
    evaluate.add_argument("--out", help="write EvalStats JSON here as well")
    evaluate.set_defaults(handler=cmd_evaluate)

    figures = commands.add_parser("export-figures", help="write plot-ready figure data")
    figures.add_argument("which", help="figure key: omni, yawrate, pitch, contacts, curve")
    figures.add_argument("inputs", nargs="+", help="trajectory or learning-curve CSV files")
    figures.add_argument("--out", required=True, help="output CSV file")
    figures.set_defaults(handler=cmd_export_figures)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        code: int = args.handler(args)
    except (LeapstackError, OSError, ValueError) as e:
        code = exit_code_for(e)
        logger.error("%s", e)
    return code
