"""Interaction loop shared by the DQN agent and the tabular baseline."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, fields

import numpy as np

from ..env import IstnEnv
from .dqn import DQNAgent, TrainConfig, epsilon_at
from .qlearning import QLAgent

AGENT_KINDS = ("dqn", "ql")
CHECKPOINT_VERSION = 1

# independent random streams derived from one seed
_STREAM_INIT, _STREAM_AGENT, _STREAM_EPISODE, _STREAM_EVAL = 0, 1, 2, 3


def stream_seed(seed: int, stream: int, index: int = 0) -> int:
    return int(np.random.SeedSequence([seed, stream, index]).generate_state(1)[0])


@dataclass
class TrainMetrics:
    """Per-iteration series; column order matches the metric file schema."""

    reward: np.ndarray
    loss: np.ndarray
    epsilon: np.ndarray
    good: np.ndarray
    fair: np.ndarray
    poor: np.ndarray
    nosignal: np.ndarray
    served: np.ndarray
    leo_served: np.ndarray

    @classmethod
    def empty(cls) -> "TrainMetrics":
        return cls(**{f.name: np.zeros(0) for f in fields(cls)})

    @classmethod
    def concat(cls, parts) -> "TrainMetrics":
        parts = list(parts)
        if not parts:
            return cls.empty()
        return cls(**{f.name: np.concatenate([getattr(p, f.name) for p in parts])
                      for f in fields(cls)})

    def __len__(self):
        return len(self.reward)


class _Recorder:
    def __init__(self):
        self.rows = []

    def add(self, reward, loss, eps, res):
        c = res.rsrp_counts
        self.rows.append((reward, loss, eps, c[0], c[1], c[2], c[3],
                          res.outcome.served_count, res.outcome.leo_served_count))

    def metrics(self) -> TrainMetrics:
        if not self.rows:
            return TrainMetrics.empty()
        cols = list(zip(*self.rows))
        names = [f.name for f in fields(TrainMetrics)]
        kw = {n: np.array(c, dtype=float if i < 3 else np.int64) for i, (n, c) in enumerate(zip(names, cols))}
        return TrainMetrics(**kw)


def make_agent(kind: str, env: IstnEnv, cfg: TrainConfig, seed: int):
    if kind == "dqn":
        rng = np.random.default_rng(stream_seed(seed, _STREAM_INIT))
        return DQNAgent(env.state_dim, env.n_actions, cfg, env.base.limits, rng)
    if kind == "ql":
        return QLAgent(env.n_actions, cfg, env.base.limits)
    raise ValueError(f"unknown agent kind {kind!r}; expected one of {AGENT_KINDS}")


class Trainer:
    """Resumable training run. ``run(n)`` advances ``n`` environment steps.

    One joint step is one iteration. Every active gNB stores its own
    transition with the shared network-wide reward.
    """

    def __init__(self, env: IstnEnv, kind: str, cfg: TrainConfig, seed: int):
        self.env = env
        self.kind = kind
        self.cfg = cfg
        self.seed = int(seed)
        self.agent = make_agent(kind, env, cfg, self.seed)
        self.rng = np.random.default_rng(stream_seed(self.seed, _STREAM_AGENT))
        self.iteration = 0
        self.episode = 0
        self.needs_reset = True
        n_users = max(len(env.base.users), 1)
        self.reward_scale = cfg.reward_scale if cfg.reward_scale is not None else 1.0 / n_users

    def episode_seed(self, episode: int) -> int:
        return stream_seed(self.seed, _STREAM_EPISODE, episode)

    def run(self, n_iterations: int) -> TrainMetrics:
        env, agent, rec = self.env, self.agent, _Recorder()
        for _ in range(n_iterations):
            if self.needs_reset:
                env.reset(self.episode_seed(self.episode))
                self.needs_reset = False
            eps = epsilon_at(self.iteration, self.cfg)
            state = env.state()
            actions = agent.act(state, eps, self.rng)
            res = env.step(actions)
            loss = agent.observe(state, actions, res.reward * self.reward_scale, res.state,
                                 res.terminal, self.rng)
            rec.add(res.reward, loss, eps, res)
            self.iteration += 1
            if res.terminal:
                self.episode += 1
                self.needs_reset = True
        return rec.metrics()

    def evaluate(self, episodes: int) -> TrainMetrics:
        """Greedy rollouts on a separate episode stream and a separate env; no learning."""
        env, rec = IstnEnv(self.env.base, self.env.config), _Recorder()
        scratch = np.random.default_rng(0)
        for ep in range(episodes):
            env.reset(stream_seed(self.seed, _STREAM_EVAL, ep))
            while True:
                res = env.step(self.agent.act(env.state(), 0.0, scratch))
                rec.add(res.reward, float("nan"), 0.0, res)
                if res.terminal:
                    break
        return rec.metrics()

    # checkpointing
    def state_dict(self) -> dict:
        meta = dict(version=CHECKPOINT_VERSION, kind=self.kind, seed=self.seed,
                    config=dataclasses.asdict(self.cfg), iteration=self.iteration,
                    episode=self.episode, needs_reset=self.needs_reset, env_t=self.env.t,
                    rng=self.rng.bit_generator.state)
        d = {f"agent_{k}": np.asarray(v) for k, v in self.agent.state_dict().items()}
        d["meta"] = np.array(json.dumps(meta))
        d["env_power"] = self.env.power
        d["env_tilt"] = self.env.tilt
        return d


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(trainer: Trainer, path) -> None:
    with open(path, "wb") as fh:
        np.savez(fh, **trainer.state_dict())


def load_checkpoint(path, env: IstnEnv, cfg: TrainConfig | None = None) -> Trainer:
    """Rebuild a :class:`Trainer` so that further ``run`` calls continue exactly.

    ``cfg`` defaults to the configuration stored in the checkpoint.
    """
    try:
        with np.load(path, allow_pickle=False) as z:
            data = {k: z[k] for k in z.files}
        meta = json.loads(str(data.pop("meta")))
    except Exception as exc:  # zip, json and key errors all mean an unreadable file
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if meta.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {meta.get('version')}")
    if cfg is None:
        stored = dict(meta["config"])
        stored["hidden_sizes"] = tuple(stored["hidden_sizes"])
        cfg = TrainConfig(**stored)
    trainer = Trainer(env, meta["kind"], cfg, meta["seed"])
    agent_state = {k[6:]: v for k, v in data.items() if k.startswith("agent_")}
    try:
        trainer.agent.load_state_dict(agent_state)
    except (KeyError, ValueError) as exc:
        raise CheckpointError(f"checkpoint does not fit this configuration: {exc}") from exc
    trainer.iteration = int(meta["iteration"])
    trainer.episode = int(meta["episode"])
    trainer.needs_reset = bool(meta["needs_reset"])
    trainer.rng.bit_generator.state = meta["rng"]
    if not trainer.needs_reset:
        env.reset(trainer.episode_seed(trainer.episode))
        if data["env_power"].shape != env.power.shape:
            raise CheckpointError("checkpoint layout does not match the scenario")
        env.power = np.array(data["env_power"])
        env.tilt = np.array(data["env_tilt"])
        env.t = int(meta["env_t"])
    return trainer


def train(env: IstnEnv, kind: str, cfg: TrainConfig, seed: int) -> TrainMetrics:
    return Trainer(env, kind, cfg, seed).run(cfg.total_iterations)
