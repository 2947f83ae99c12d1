"""Command line entry point.

    istnsim run --config cfg.yaml --agent dqn --seeds 0-4 --out runs/dqn
    istnsim evaluate --checkpoint runs/dqn/checkpoints/seed0.npz --config cfg.yaml --out ev
    istnsim config --out default.yaml

Exit status is 0 on success, 2 for usage or configuration errors, 3 when the
output directory cannot be written and 4 for unusable checkpoints.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .agents.training import AGENT_KINDS, CheckpointError, Trainer, load_checkpoint, save_checkpoint
from .config import ConfigError, RunConfig, build_scenario, dump_config, expand_config, load_config
from .env import IstnEnv
from .report import RunReport

log = logging.getLogger("istnsim")

EXIT_USAGE, EXIT_OUTPUT, EXIT_CHECKPOINT = 2, 3, 4


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def parse_seeds(text: str) -> list[int]:
    """'0,2,5' or '0-4' or a mix such as '0-2,7'."""
    seeds = []
    try:
        for part in text.split(","):
            lo, _, hi = part.strip().partition("-")
            lo = int(lo)
            hi = int(hi) if hi else lo
            if lo < 0 or hi < lo:
                raise ValueError
            seeds.extend(range(lo, hi + 1))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed list {text!r}") from None
    if len(set(seeds)) != len(seeds):
        raise argparse.ArgumentTypeError(f"duplicate seeds in {text!r}")
    return seeds


def _prepare_out(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out):
            pass
    except OSError as exc:
        raise CliError(f"output directory {out} is not writable: {exc}", EXIT_OUTPUT) from exc
    return out


def _train_one(cfg: RunConfig, kind: str, seed: int, iterations: int, checkpoint: str | None):
    env = IstnEnv(build_scenario(cfg.scenario), cfg.env)
    trainer = Trainer(env, kind, cfg.training, seed)
    metrics = trainer.run(iterations)
    if checkpoint is not None:
        save_checkpoint(trainer, checkpoint)
    return seed, metrics


def run_experiment(cfg: RunConfig, kind: str, seeds, iterations: int | None = None,
                   out=None, workers: int = 1, smooth: int | None = None,
                   level: float = 0.90) -> RunReport:
    """Train one agent per seed and collect the report; writes files when ``out`` is set."""
    n = cfg.training.total_iterations if iterations is None else iterations
    ck_dir = None
    if out is not None:
        ck_dir = Path(out) / "checkpoints"
        ck_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, kind, s, n, None if ck_dir is None else str(ck_dir / f"seed{s}.npz"))
            for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_train_one, *zip(*jobs)))
    else:
        results = []
        for job in jobs:
            log.info("training %s seed %d for %d iterations", kind, job[2], n)
            results.append(_train_one(*job))
    runs = dict(sorted(results, key=lambda r: r[0]))
    report = RunReport(kind, runs, len(build_scenario(cfg.scenario).users), level=level,
                       smooth=smooth or cfg.env.episode_length)
    if out is not None:
        for p in report.write(out):
            log.info("wrote %s", p)
    return report


def _load(path) -> RunConfig:
    return load_config(path) if path else RunConfig()


def cmd_run(args) -> int:
    cfg = _load(args.config)
    if args.iterations is not None:
        cfg = dataclasses.replace(
            cfg, training=dataclasses.replace(cfg.training, total_iterations=args.iterations))
    out = _prepare_out(args.out)
    report = run_experiment(cfg, args.agent, args.seeds, out=out, workers=args.workers,
                            smooth=args.smooth, level=args.level)
    s = report.summary()
    if "final_mean_reward" in s:
        print(f"{args.agent}: final mean reward {s['final_mean_reward']:.2f} "
              f"over seeds {report.seeds}; results in {out}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _load(args.config)
    out = _prepare_out(args.out)
    env = IstnEnv(build_scenario(cfg.scenario), cfg.env)
    try:
        trainer = load_checkpoint(args.checkpoint, env, cfg.training)
    except FileNotFoundError as exc:
        raise CliError(f"checkpoint not found: {exc}", EXIT_CHECKPOINT) from exc
    except CheckpointError as exc:
        raise CliError(str(exc), EXIT_CHECKPOINT) from exc
    metrics = trainer.evaluate(args.episodes)
    report = RunReport(trainer.kind, {trainer.seed: metrics}, len(env.base.users),
                       smooth=cfg.env.episode_length)
    report.write(out)
    if len(metrics):
        print(f"{trainer.kind} seed {trainer.seed}: mean greedy reward {metrics.reward.mean():.2f} "
              f"over {args.episodes} episodes")
    return 0


def cmd_config(args) -> int:
    cfg = _load(args.config)
    text = dump_config(expand_config(cfg))
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise CliError(f"cannot write {args.out}: {exc}", EXIT_OUTPUT) from exc
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="istnsim",
                                description="Sector power/downtilt learning in a satellite-terrestrial network.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="train agents over several seeds")
    r.add_argument("--config", help="YAML run configuration (defaults when omitted)")
    r.add_argument("--agent", choices=AGENT_KINDS, default="dqn")
    r.add_argument("--seeds", type=parse_seeds, default=[0], help="e.g. 0-4 or 0,3,7")
    r.add_argument("--iterations", type=int, help="override training.total_iterations")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--workers", type=int, default=1, help="parallel seed processes")
    r.add_argument("--smooth", type=int, help="moving-average window (default: episode length)")
    r.add_argument("--level", type=float, default=0.90, help="confidence level of the bands")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("evaluate", help="greedy rollouts of a saved agent")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--config", help="configuration the agent was trained with")
    e.add_argument("--episodes", type=int, default=10)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_evaluate)

    c = sub.add_parser("config", help="print the fully expanded configuration")
    c.add_argument("--config", help="file to expand (defaults when omitted)")
    c.add_argument("--out", help="write here instead of stdout")
    c.set_defaults(func=cmd_config)
    return p


def main(argv=None) -> int:
    level = os.environ.get("ISTNSIM_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=level if isinstance(logging.getLevelName(level), int) else "WARNING",
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    problems = [f"--{n} must be >= {lo}" for n, lo in
                (("iterations", 0), ("episodes", 0), ("workers", 1), ("smooth", 1))
                if getattr(args, n, None) is not None and getattr(args, n) < lo]
    if hasattr(args, "level") and not 0 < args.level < 1:
        problems.append("--level must lie in (0, 1)")
    if problems:
        print(f"istnsim: error: {'; '.join(problems)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"istnsim: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CliError as exc:
        print(f"istnsim: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
