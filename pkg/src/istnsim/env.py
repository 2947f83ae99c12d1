"""Markov decision process over sector power and downtilt.

Every active gNB is one agent. Its state is the (3, 2) matrix of
(transmit power dBm, total downtilt deg) over its sectors; its action is a
composite index in ``[0, 9**3)`` carrying one (tilt delta, power delta) pair
per sector. All agents act jointly each step and share the network-wide reward.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .association import AssociationOutcome, Eligibility, associate, eligibility
from .channel import category_counts
from .scenario import SECTORS_PER_SITE, Scenario, redraw_users

ACTIONS_PER_SECTOR = 9
TILT_DELTAS = (-1.0, 0.0, 1.0)
POWER_DELTAS = (-5.0, 0.0, 5.0)


def n_actions(n_sectors: int = SECTORS_PER_SITE) -> int:
    return ACTIONS_PER_SECTOR ** n_sectors


def decode_action(index: int, n_sectors: int = SECTORS_PER_SITE,
                  tilt_step: float = 1.0, power_step: float = 5.0) -> np.ndarray:
    """Composite index -> (n_sectors, 2) array of (tilt delta, power delta).

    Sector ``i`` reads base-9 digit ``i`` (least significant first). Within a
    digit ``d``, ``d // 3`` picks the tilt move and ``d % 3`` the power move.
    """
    if not 0 <= index < n_actions(n_sectors):
        raise ValueError(f"action index {index} outside [0, {n_actions(n_sectors)})")
    out = np.empty((n_sectors, 2))
    for i in range(n_sectors):
        d = (index // ACTIONS_PER_SECTOR**i) % ACTIONS_PER_SECTOR
        out[i] = ((d // 3 - 1) * tilt_step, (d % 3 - 1) * power_step)
    return out


def encode_action(deltas, tilt_step: float = 1.0, power_step: float = 5.0) -> int:
    index = 0
    for i, (dt, dp) in enumerate(np.asarray(deltas, dtype=float)):
        t, p = int(round(dt / tilt_step)) + 1, int(round(dp / power_step)) + 1
        if not (0 <= t < 3 and 0 <= p < 3):
            raise ValueError(f"deltas {dt, dp} are not a valid sector move")
        index += (3 * t + p) * ACTIONS_PER_SECTOR**i
    return index


@dataclass(frozen=True)
class EnvConfig:
    episode_length: int = 50
    tilt_step: float = 1.0
    power_step: float = 5.0
    association: str = "greedy"

    def __post_init__(self):
        if self.episode_length < 1:
            raise ValueError("episode_length must be >= 1")
        if self.association not in ("optimal", "greedy"):
            raise ValueError("association must be 'optimal' or 'greedy'")


@dataclass(frozen=True)
class StepResult:
    state: np.ndarray
    reward: float
    outcome: AssociationOutcome
    eligibility: Eligibility
    terminal: bool

    @property
    def rsrp_counts(self) -> np.ndarray:
        """Users per RSRP category (good, fair, poor, no signal), by best server."""
        return category_counts(self.eligibility.best_rsrp)


class IstnEnv:
    """Step-based environment around a fixed :class:`Scenario`.

    ``reset(seed)`` redraws users and demands and restores the sectors'
    configured initial controls. Dynamics are deterministic given the seed.
    """

    def __init__(self, scenario: Scenario, config: EnvConfig = EnvConfig()):
        self.base = scenario
        self.config = config
        self.scenario = scenario
        self.power, self.tilt = scenario.initial_controls()
        self.t = 0

    @property
    def agents(self) -> list[int]:
        return self.base.active_ids

    @property
    def n_actions(self) -> int:
        return n_actions(SECTORS_PER_SITE)

    @property
    def state_dim(self) -> int:
        return 2 * SECTORS_PER_SITE

    def reset(self, episode_seed: int) -> np.ndarray:
        self.scenario = redraw_users(self.base, np.random.default_rng(episode_seed))
        self.power, self.tilt = self.base.initial_controls()
        self.t = 0
        return self.state()

    def set_scenario(self, scenario: Scenario) -> None:
        """Swap the underlying scenario (e.g. a new outage mask); takes effect on reset."""
        self.base = scenario

    def state(self) -> np.ndarray:
        """Raw state, shape (n_agents, 3, 2): (power dBm, tilt deg) per sector."""
        ids = self.agents
        return np.stack([self.power[ids], self.tilt[ids]], axis=-1)

    def observe(self) -> np.ndarray:
        return normalize_state(self.state(), self.base.limits)

    def evaluate(self) -> tuple[float, AssociationOutcome, Eligibility]:
        """Reward, association and link budget for the current controls."""
        scn = self.scenario
        elig = eligibility(scn, self.power, self.tilt)
        out = associate(elig, scn.min_served, scn.penalty_lambda, self.config.association)
        return gated_reward(out), out, elig

    def step(self, actions) -> StepResult:
        actions = np.asarray(actions, dtype=int).reshape(-1)
        ids = self.agents
        if len(actions) != len(ids):
            raise ValueError(f"expected {len(ids)} actions, got {len(actions)}")
        lim = self.base.limits
        cfg = self.config
        for m, a in zip(ids, actions):
            d = decode_action(int(a), SECTORS_PER_SITE, cfg.tilt_step, cfg.power_step)
            self.tilt[m] = np.clip(self.tilt[m] + d[:, 0], lim.tilt_min, lim.tilt_max)
            self.power[m] = np.clip(self.power[m] + d[:, 1], lim.power_min, lim.power_max)
        self.t += 1
        reward, out, elig = self.evaluate()
        return StepResult(self.state(), reward, out, elig, self.t >= cfg.episode_length)


def gated_reward(outcome: AssociationOutcome) -> float:
    """Objective when enough users are served, exactly zero otherwise."""
    return outcome.objective if outcome.feasible else 0.0


def normalize_state(state: np.ndarray, limits) -> np.ndarray:
    """Map raw (..., 3, 2) states into [0, 1] and flatten the sector axis."""
    p = (state[..., 0] - limits.power_min) / (limits.power_max - limits.power_min)
    t = (state[..., 1] - limits.tilt_min) / (limits.tilt_max - limits.tilt_min)
    return np.stack([p, t], axis=-1).reshape(*state.shape[:-2], -1)


def denormalize_state(obs: np.ndarray, limits) -> np.ndarray:
    s = np.asarray(obs, dtype=float).reshape(*np.shape(obs)[:-1], -1, 2)
    p = s[..., 0] * (limits.power_max - limits.power_min) + limits.power_min
    t = s[..., 1] * (limits.tilt_max - limits.tilt_min) + limits.tilt_min
    return np.stack([p, t], axis=-1)
