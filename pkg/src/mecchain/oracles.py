"""Small finite MDPs with known solutions, used to check the learners.

Each MDP is a pair of arrays: ``P[s, a, s']`` transition probabilities and
``R[s, a]`` expected rewards. :func:`value_iteration` gives the fixed point
that tabular Q-learning and the DQN should recover.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FiniteMdp:
    name: str
    transitions: np.ndarray  # (S, A, S)
    rewards: np.ndarray      # (S, A)

    def __post_init__(self):
        p, r = self.transitions, self.rewards
        if p.ndim != 3 or p.shape[0] != p.shape[2] or r.shape != p.shape[:2]:
            raise ValueError("expected P of shape (S, A, S) and R of shape (S, A)")
        if not np.allclose(p.sum(axis=2), 1.0):
            raise ValueError("transition rows must sum to one")

    @property
    def num_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transitions.shape[1]

    def step(self, state: int, action: int, rng: np.random.Generator) -> tuple[int, float]:
        row = self.transitions[state, action]
        nxt = int(np.argmax(row)) if row.max() == 1.0 else int(rng.choice(row.size, p=row))
        return nxt, float(self.rewards[state, action])


def value_iteration(mdp: FiniteMdp, gamma: float, tol: float = 1e-13, max_iter: int = 100_000) -> np.ndarray:
    """Optimal action values ``Q*`` by repeated Bellman backups."""
    q = np.zeros_like(mdp.rewards, dtype=float)
    for _ in range(max_iter):
        q_next = mdp.rewards + gamma * mdp.transitions @ q.max(axis=1)
        if np.max(np.abs(q_next - q)) < tol:
            return q_next
        q = q_next
    raise RuntimeError("value iteration did not converge")


def _deterministic(next_state, rewards) -> tuple[np.ndarray, np.ndarray]:
    next_state = np.asarray(next_state)
    s, a = next_state.shape
    p = np.zeros((s, a, s))
    p[np.arange(s)[:, None], np.arange(a)[None, :], next_state] = 1.0
    return p, np.asarray(rewards, dtype=float)


def chain_mdp() -> FiniteMdp:
    # walk right along four states for a payoff at the end, or idle at the start
    p, r = _deterministic([[0, 1], [1, 2], [2, 3], [3, 0]],
                          [[0.45, 0.0], [0.1, 0.0], [0.1, 0.0], [0.1, 2.0]])
    return FiniteMdp("chain", p, r)


def two_state_mdp() -> FiniteMdp:
    # a short-term sacrifice (state 0, action 1) unlocks a richer state
    p, r = _deterministic([[0, 1], [0, 1]], [[0.5, -1.0], [0.0, 1.0]])
    return FiniteMdp("two_state", p, r)


def offload_like_mdp() -> FiniteMdp:
    """Three buffer levels; local work lets the buffer grow, offloading empties it."""
    p, r = _deterministic([[1, 0], [2, 0], [2, 0]],
                          [[-0.2, -0.6], [-0.5, -0.7], [-1.5, -0.9]])
    return FiniteMdp("offload_like", p, r)


def bellman_suite() -> list[FiniteMdp]:
    return [chain_mdp(), two_state_mdp(), offload_like_mdp()]


class ToyOffloadEnv:
    """Deterministic two-bucket offloading problem with four states.

    State ``(load, channel)`` with ``load`` in {low, high} and a channel that
    alternates bad/good every slot. Action 1 offloads, action 0 computes
    locally. Local work in the high bucket is expensive and keeps the load
    high; offloading on a good channel is cheap, on a bad one costly.
    """

    # reward[load, channel, action]
    REWARD = np.array([[[-0.3, -1.0], [-0.3, -0.4]],
                       [[-1.2, -0.8], [-1.2, -0.2]]])

    def __init__(self):
        self.state = 0

    @staticmethod
    def encode(load: int, channel: int) -> int:
        return 2 * load + channel

    @staticmethod
    def decode(state: int) -> tuple[int, int]:
        return divmod(state, 2)

    @staticmethod
    def features(state: int) -> np.ndarray:
        load, channel = divmod(int(state), 2)
        return np.array([load, channel], dtype=float)

    def transition(self, state: int, action: int) -> tuple[int, float]:
        load, channel = self.decode(state)
        reward = float(self.REWARD[load, channel, action])
        # offloading clears the load; local work on low load lets it pile up
        next_load = 0 if action == 1 else 1
        return self.encode(next_load, 1 - channel), reward

    def as_mdp(self) -> FiniteMdp:
        nxt = np.zeros((4, 2), dtype=int)
        rew = np.zeros((4, 2))
        for s in range(4):
            for a in range(2):
                nxt[s, a], rew[s, a] = self.transition(s, a)
        p, r = _deterministic(nxt, rew)
        return FiniteMdp("toy_offload", p, r)

    def reset(self, state: int = 0) -> int:
        self.state = state
        return state

    def step(self, action: int) -> tuple[int, float]:
        self.state, reward = self.transition(self.state, action)
        return self.state, reward


def q_learn_mdp(mdp: FiniteMdp, gamma: float, learning_rate: float, steps: int,
                rng: np.random.Generator, start: int = 0):
    """Tabular Q-learning along one trajectory with uniformly random actions."""
    from .agents.tabular import QTable, Transition, q_update

    table = QTable(mdp.num_states, mdp.num_actions, learning_rate, gamma)
    s = start
    for _ in range(steps):
        a = int(rng.integers(mdp.num_actions))
        s2, r = mdp.step(s, a, rng)
        q_update(table, Transition(s, a, r, s2))
        s = s2
    return table
