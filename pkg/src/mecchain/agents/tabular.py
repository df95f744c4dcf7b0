"""Tabular Q-learning over a bucketed observation (RLO)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import LearnerConfig, SimConfig
from ..env import MinerState
from .policies import EpsilonSchedule, epsilon_greedy


def _bucket(value, upper, bins):
    # uniform bins over [0, upper]; out-of-range values clamp to the edge bins
    k = int(np.floor(value / upper * bins))
    return min(max(k, 0), bins - 1)


def num_states(learner: LearnerConfig) -> int:
    return learner.state_bins ** 2 * 2 * learner.hash_bins


def discretize(obs: MinerState, sim: SimConfig, learner: LearnerConfig) -> int:
    """Mixed-radix index of (new bits, buffered bits, channel, hash power) buckets.

    New and buffered bits are summed over the miner's tasks before bucketing.
    """
    m = sim.num_tasks
    bins = learner.state_bins
    d1 = _bucket(float(np.sum(obs.new_bits)), m * sim.task_size_range_bits[1], bins)
    d0 = _bucket(float(np.sum(obs.buffered_bits)), m * learner.buffer_range_bits, bins)
    p_lo, p_hi = sim.miner_hash_range
    p = _bucket(obs.hash_power - p_lo, p_hi - p_lo, learner.hash_bins) if p_hi > p_lo else 0
    g = int(obs.channel)
    return ((d1 * bins + d0) * 2 + g) * learner.hash_bins + p


@dataclass
class Transition:
    state: object
    action: int
    reward: float
    next_state: object


class QTable:
    def __init__(self, n_states: int, n_actions: int, learning_rate: float = 0.1, gamma: float = 0.85):
        if not 0 <= learning_rate <= 1:
            raise ValueError("learning rate must lie in [0, 1]")
        if not 0 < gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        self.values = np.zeros((n_states, n_actions))
        self.learning_rate = learning_rate
        self.gamma = gamma

    @property
    def shape(self):
        return self.values.shape

    def greedy(self, state: int) -> int:
        return int(np.argmax(self.values[state]))

    def to_dict(self) -> dict:
        """JSON-ready form; only visited (non-zero) rows are listed."""
        rows = {str(s): row.tolist() for s, row in enumerate(self.values) if np.any(row)}
        return {"n_states": self.values.shape[0], "n_actions": self.values.shape[1],
                "learning_rate": self.learning_rate, "gamma": self.gamma, "rows": rows}

    @classmethod
    def from_dict(cls, payload: dict) -> "QTable":
        table = cls(payload["n_states"], payload["n_actions"], payload["learning_rate"], payload["gamma"])
        for s, row in payload["rows"].items():
            table.values[int(s)] = row
        return table


def q_update(table: QTable, transition: Transition) -> QTable:
    s, a = transition.state, transition.action
    target = transition.reward + table.gamma * table.values[transition.next_state].max()
    table.values[s, a] += table.learning_rate * (target - table.values[s, a])
    return table


class RloAgent:
    """One miner's Q-learner."""

    def __init__(self, sim: SimConfig, learner: LearnerConfig, rng: np.random.Generator,
                 table: QTable | None = None, schedule: EpsilonSchedule | None = None):
        self.sim = sim
        self.learner = learner
        self.rng = rng
        self.table = table or QTable(num_states(learner), sim.num_actions, learner.q_learning_rate, learner.gamma)
        self.schedule = schedule or EpsilonSchedule.from_config(learner)
        self.t = 0
        self.updates = 0

    def act(self, obs: MinerState) -> int:
        s = discretize(obs, self.sim, self.learner)
        return epsilon_greedy(self.table.values[s], self.schedule(self.t), self.rng)

    def observe(self, obs, action, reward, next_obs) -> None:
        s = discretize(obs, self.sim, self.learner)
        s2 = discretize(next_obs, self.sim, self.learner)
        q_update(self.table, Transition(s, action, reward, s2))
        self.updates += 1
        self.t += 1
