"""Tabular Q-learning baseline over a discretised per-gNB state."""
from __future__ import annotations

import numpy as np


class QTable:
    """Sparse action-value table; unseen states read as all zeros."""

    def __init__(self, n_actions: int):
        self.n_actions = n_actions
        self.values: dict[tuple, np.ndarray] = {}

    def __len__(self):
        return len(self.values)

    def get(self, key) -> np.ndarray:
        row = self.values.get(key)
        return np.zeros(self.n_actions) if row is None else row

    def row(self, key) -> np.ndarray:
        row = self.values.get(key)
        if row is None:
            row = self.values[key] = np.zeros(self.n_actions)
        return row


def ql_update(table: QTable, key, action: int, reward: float, next_key, alpha: float,
              gamma: float, terminal: bool = False) -> float:
    """Q <- Q + alpha * (r + gamma * max Q(next) - Q); returns the new value."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    target = reward if terminal else reward + gamma * float(table.get(next_key).max())
    row = table.row(key)
    row[action] += alpha * (target - row[action])
    return float(row[action])


def state_key(state, limits, power_step: float = 5.0, tilt_step: float = 1.0) -> tuple:
    """Discretise a raw (3, 2) sector state into (power level, tilt level) per sector."""
    s = np.asarray(state, dtype=float)
    n_power = int(np.floor((limits.power_max - limits.power_min) / power_step + 1e-9))
    n_tilt = int(np.floor((limits.tilt_max - limits.tilt_min) / tilt_step + 1e-9))
    p = np.clip(np.floor((s[:, 0] - limits.power_min) / power_step + 1e-9), 0, n_power)
    t = np.clip(np.round((s[:, 1] - limits.tilt_min) / tilt_step), 0, n_tilt)
    return tuple(int(v) for pair in zip(p, t) for v in pair)


class QLAgent:
    kind = "ql"

    def __init__(self, n_actions: int, cfg, limits):
        self.cfg = cfg
        self.limits = limits
        self.table = QTable(n_actions)

    def key(self, state) -> tuple:
        return state_key(state, self.limits, self.cfg.ql_power_step, self.cfg.ql_tilt_step)

    def greedy(self, state, rng) -> int:
        """Best known action; ties (e.g. an unvisited state) are broken uniformly at random."""
        row = self.table.get(self.key(state))
        best = np.flatnonzero(row == row.max())
        return int(best[0]) if len(best) == 1 else int(rng.choice(best))

    def act(self, states, epsilon, rng) -> np.ndarray:
        explore = rng.random(len(states)) < epsilon
        random = rng.integers(self.table.n_actions, size=len(states))
        greedy = np.array([self.greedy(s, rng) for s in states], dtype=int)
        return np.where(explore, random, greedy).astype(int)

    def observe(self, states, actions, reward, next_states, terminal, rng) -> float:
        errs = []
        for s, a, s2 in zip(states, actions, next_states):
            k = self.key(s)
            before = float(self.table.get(k)[a])
            after = ql_update(self.table, k, int(a), reward, self.key(s2), self.cfg.ql_alpha,
                              self.cfg.gamma, terminal)
            errs.append((after - before) / self.cfg.ql_alpha)
        return float(np.mean(np.square(errs))) if errs else float("nan")

    def state_dict(self) -> dict:
        keys = sorted(self.table.values)
        width = len(keys[0]) if keys else 0
        return dict(keys=np.array(keys, dtype=np.int64).reshape(len(keys), width),
                    values=np.array([self.table.values[k] for k in keys]).reshape(len(keys), self.table.n_actions))

    def load_state_dict(self, d: dict) -> None:
        values = np.asarray(d["values"])
        if values.ndim != 2 or values.shape[1] != self.table.n_actions:
            raise ValueError("Q-table width does not match the action space")
        self.table.values = {tuple(int(v) for v in k): np.array(row)
                             for k, row in zip(d["keys"], values)}
