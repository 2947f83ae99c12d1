"""Deep Q-learning: TD targets from a target network, experience replay, epsilon-greedy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env import normalize_state
from .network import QNetwork, make_optimizer
from .replay import Batch, ReplayMemory


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    batch_size: int = 32
    total_iterations: int = 20000
    gamma: float = 0.95
    eps_start: float = 1.0
    eps_end: float = 0.01
    eps_decay_steps: int = 5000
    target_sync_period: int = 200
    replay_capacity: int = 10000
    learning_starts: int = 500
    hidden_sizes: tuple[int, ...] = (128, 128)
    optimizer: str = "sgd"
    reward_scale: float | None = None   # None: divide rewards by the user count
    ql_alpha: float = 0.1
    ql_power_step: float = 5.0
    ql_tilt_step: float = 1.0

    def __post_init__(self):
        positive = ("learning_rate", "batch_size", "gamma", "target_sync_period",
                    "replay_capacity", "ql_alpha", "ql_power_step", "ql_tilt_step")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.total_iterations < 0 or self.eps_decay_steps < 0 or self.learning_starts < 0:
            raise ValueError("iteration counts must be >= 0")
        if self.gamma > 1:
            raise ValueError("gamma must lie in (0, 1]")
        if not 0 <= self.eps_end <= self.eps_start <= 1:
            raise ValueError("need 0 <= eps_end <= eps_start <= 1")
        if self.ql_alpha > 1:
            raise ValueError("ql_alpha must lie in (0, 1]")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError("optimizer must be 'sgd' or 'adam'")
        if self.reward_scale is not None and not self.reward_scale > 0:
            raise ValueError("reward_scale must be positive")


def epsilon_at(step: int, cfg: TrainConfig) -> float:
    """Linear decay from ``eps_start`` to ``eps_end`` over ``eps_decay_steps``."""
    if step < 0:
        raise ValueError("step must be >= 0")
    if cfg.eps_decay_steps == 0 or step >= cfg.eps_decay_steps:
        return cfg.eps_end
    frac = step / cfg.eps_decay_steps
    return cfg.eps_start + frac * (cfg.eps_end - cfg.eps_start)


def select_action(net: QNetwork, state, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy choice; greedy ties go to the lowest index."""
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    if rng.random() < epsilon:
        return int(rng.integers(net.n_outputs))
    return int(np.argmax(net.forward(state)))


def select_actions(net: QNetwork, states, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """Vectorised :func:`select_action` over a stack of per-agent states."""
    states = np.atleast_2d(states)
    greedy = np.argmax(net.forward(states), axis=1)
    explore = rng.random(len(states)) < epsilon
    random = rng.integers(net.n_outputs, size=len(states))
    return np.where(explore, random, greedy).astype(int)


def td_targets(net: QNetwork, batch: Batch, gamma: float) -> np.ndarray:
    q_next = net.forward(batch.next_states, target=True).max(axis=1)
    return batch.rewards + gamma * np.where(batch.terminals, 0.0, q_next)


def td_loss_and_grads(net: QNetwork, batch: Batch, gamma: float):
    """Mean squared TD error on the taken actions and its parameter gradients."""
    if len(batch.actions) == 0:
        raise ValueError("empty batch")
    y = td_targets(net, batch, gamma)
    q, cache = net.forward_cached(batch.states)
    rows = np.arange(len(y))
    err = q[rows, batch.actions] - y
    dout = np.zeros_like(q)
    dout[rows, batch.actions] = 2.0 * err / len(y)
    return float(np.mean(err**2)), net.backward(cache, dout)


def td_train_step(net: QNetwork, batch: Batch, gamma: float, learning_rate: float,
                  optimizer=None) -> float:
    """One gradient update of the online parameters; returns the pre-update loss."""
    loss, grads = td_loss_and_grads(net, batch, gamma)
    opt = optimizer if optimizer is not None else make_optimizer("sgd", learning_rate)
    opt.step(net.params, grads)
    return loss


class DQNAgent:
    kind = "dqn"

    def __init__(self, state_dim: int, n_actions: int, cfg: TrainConfig, limits,
                 rng: np.random.Generator):
        self.cfg = cfg
        self.limits = limits
        self.net = QNetwork((state_dim, *cfg.hidden_sizes, n_actions), rng)
        self.optimizer = make_optimizer(cfg.optimizer, cfg.learning_rate)
        self.memory = ReplayMemory(cfg.replay_capacity, state_dim)
        self.train_steps = 0

    def act(self, states, epsilon, rng) -> np.ndarray:
        return select_actions(self.net, normalize_state(states, self.limits), epsilon, rng)

    def observe(self, states, actions, reward, next_states, terminal, rng) -> float:
        obs = normalize_state(states, self.limits)
        nxt = normalize_state(next_states, self.limits)
        for s, a, s2 in zip(obs, actions, nxt):
            self.memory.push(s, a, reward, s2, terminal)
        cfg = self.cfg
        if len(self.memory) < max(cfg.learning_starts, cfg.batch_size):
            return float("nan")
        loss = td_train_step(self.net, self.memory.sample(cfg.batch_size, rng), cfg.gamma,
                             cfg.learning_rate, self.optimizer)
        self.train_steps += 1
        if self.train_steps % cfg.target_sync_period == 0:
            self.net.sync_target()
        return loss

    def state_dict(self) -> dict:
        d = {f"param{i}": p for i, p in enumerate(self.net.params)}
        d.update({f"target{i}": p for i, p in enumerate(self.net.target)})
        d.update({f"opt_{k}": v for k, v in self.optimizer.state_dict().items()})
        d.update({f"replay_{k}": v for k, v in self.memory.state_dict().items()})
        d["train_steps"] = self.train_steps
        d["sizes"] = np.array(self.net.sizes)
        return d

    def load_state_dict(self, d: dict) -> None:
        sizes = tuple(int(s) for s in d["sizes"])
        if sizes != self.net.sizes:
            raise ValueError(f"network shape {sizes} does not match configured {self.net.sizes}")
        n = len(self.net.params)
        self.net = QNetwork(sizes, params=[d[f"param{i}"] for i in range(n)])
        self.net.target = [np.array(d[f"target{i}"]) for i in range(n)]
        self.optimizer.load_state_dict({k[4:]: v for k, v in d.items() if k.startswith("opt_")})
        self.memory.load_state_dict({k[7:]: v for k, v in d.items() if k.startswith("replay_")})
        self.train_steps = int(d["train_steps"])
