"""Action encoding, exploration and the fixed baseline policies."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..config import LearnerConfig, SimConfig
from ..env import MinerState


def action_to_bits(index: int, num_tasks: int) -> np.ndarray:
    """Joint action ``index`` -> offloading vector; bit ``m`` decides task ``m``."""
    if not 0 <= index < 2 ** num_tasks:
        raise ValueError(f"action {index} outside [0, {2 ** num_tasks})")
    return (index >> np.arange(num_tasks)) & 1


def bits_to_action(bits) -> int:
    bits = np.asarray(bits, dtype=int)
    if not np.all((bits == 0) | (bits == 1)):
        raise ValueError("offloading decisions must be 0 or 1")
    return int(np.sum(bits << np.arange(bits.size)))


def action_table(num_tasks: int) -> np.ndarray:
    """Row ``a`` is the offloading vector of joint action ``a``."""
    return (np.arange(2 ** num_tasks)[:, None] >> np.arange(num_tasks)) & 1


@dataclass(frozen=True)
class EpsilonSchedule:
    start: float = 1.0
    end: float = 0.05
    decay_slots: int = 2000

    def __post_init__(self):
        if not 0 <= self.end <= self.start <= 1:
            raise ValueError("need 0 <= end <= start <= 1")
        if self.decay_slots < 0:
            raise ValueError("decay_slots must be non-negative")

    @classmethod
    def from_config(cls, learner: LearnerConfig) -> "EpsilonSchedule":
        return cls(learner.epsilon_start, learner.epsilon_end, learner.epsilon_decay_slots)

    def __call__(self, t: int) -> float:
        if self.decay_slots == 0 or t >= self.decay_slots:
            return self.end
        return self.start + (self.end - self.start) * t / self.decay_slots


def epsilon_greedy(values, epsilon: float, rng: np.random.Generator) -> int:
    values = np.asarray(values)
    if values.size == 0:
        raise ValueError("no actions to choose from")
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon {epsilon} outside [0, 1]")
    # always draw so the random stream does not depend on epsilon
    u = rng.random()
    if u < epsilon:
        return int(rng.integers(values.size))
    return int(np.argmax(values))


def features(obs: MinerState, sim: SimConfig, learner: LearnerConfig) -> np.ndarray:
    """Observation scaled to about [0, 1] by the configured ranges."""
    d1 = obs.new_bits / sim.task_size_range_bits[1]
    d0 = np.minimum(obs.buffered_bits / learner.buffer_range_bits, 1.0)
    p_lo, p_hi = sim.miner_hash_range
    p = (obs.hash_power - p_lo) / (p_hi - p_lo) if p_hi > p_lo else 0.0
    y = obs.payment / (sim.hash_price_tokens_per_hash_s * p_hi)
    return np.concatenate([d1, d0, [float(obs.channel), p, y]])


def feature_size(sim: SimConfig) -> int:
    return 2 * sim.num_tasks + 3


class Baseline(str, enum.Enum):
    NO = "NO"
    EO = "EO"
    RANDOM = "RANDOM"


def baseline_policy(kind, obs: MinerState, rng: np.random.Generator | None = None) -> np.ndarray:
    kind = Baseline(kind)
    m = len(obs.new_bits)
    if kind is Baseline.NO:
        return np.zeros(m, dtype=int)
    if kind is Baseline.EO:
        return np.ones(m, dtype=int)
    if rng is None:
        raise ValueError("the random baseline needs an rng")
    return rng.integers(0, 2, size=m)


class BaselineAgent:
    """Adapter so fixed policies run through the same episode loop as learners."""

    def __init__(self, kind, rng: np.random.Generator | None = None):
        self.kind = Baseline(kind)
        self.rng = rng

    def act(self, obs: MinerState) -> int:
        return bits_to_action(baseline_policy(self.kind, obs, self.rng))

    def observe(self, obs, action, reward, next_obs) -> None:
        pass
