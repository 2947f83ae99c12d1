from __future__ import annotations

from typing import NamedTuple

import numpy as np


class Batch(NamedTuple):
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    terminals: np.ndarray


class ReplayMemory:
    """Fixed-capacity ring buffer of transitions; the oldest entry is overwritten first."""

    def __init__(self, capacity: int, state_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.terminals = np.zeros(capacity, dtype=bool)
        self.cursor = 0
        self.size = 0

    def __len__(self):
        return self.size

    def push(self, state, action, reward, next_state, terminal) -> None:
        i = self.cursor
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.terminals[i] = terminal
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if batch_size > self.size:
            raise ValueError(f"cannot sample {batch_size} from {self.size} stored transitions")
        return rng.choice(self.size, size=batch_size, replace=False)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        idx = self.sample_indices(batch_size, rng)
        return Batch(self.states[idx], self.actions[idx], self.rewards[idx],
                     self.next_states[idx], self.terminals[idx])

    def oldest_first(self) -> Batch:
        """Stored transitions in insertion order."""
        if self.size < self.capacity:
            idx = np.arange(self.size)
        else:
            idx = (np.arange(self.capacity) + self.cursor) % self.capacity
        return Batch(self.states[idx], self.actions[idx], self.rewards[idx],
                     self.next_states[idx], self.terminals[idx])

    def state_dict(self) -> dict:
        return dict(states=self.states, actions=self.actions, rewards=self.rewards,
                    next_states=self.next_states, terminals=self.terminals,
                    cursor=self.cursor, size=self.size)

    def load_state_dict(self, d: dict) -> None:
        if d["states"].shape != self.states.shape:
            raise ValueError("replay memory shape mismatch")
        self.states = np.array(d["states"])
        self.actions = np.array(d["actions"])
        self.rewards = np.array(d["rewards"])
        self.next_states = np.array(d["next_states"])
        self.terminals = np.array(d["terminals"])
        self.cursor = int(d["cursor"])
        self.size = int(d["size"])
