"""Per-slot episode records and the convergence detector."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SERIES = ("reward", "privacy", "energy_j", "latency_s", "cost", "mining_reward",
          "deadline_violations", "offload_fraction")


@dataclass
class EpisodeMetrics:
    """Slot series summed over miners (offload fraction is averaged)."""

    total_slots: int
    reward: np.ndarray = field(default=None)
    privacy: np.ndarray = field(default=None)
    energy_j: np.ndarray = field(default=None)
    latency_s: np.ndarray = field(default=None)
    cost: np.ndarray = field(default=None)
    mining_reward: np.ndarray = field(default=None)
    deadline_violations: np.ndarray = field(default=None)
    offload_fraction: np.ndarray = field(default=None)
    train_loss: list = field(default_factory=list)
    _t: int = 0

    def __post_init__(self):
        for name in SERIES:
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(self.total_slots))

    def record(self, outcomes) -> None:
        t = self._t
        if t >= self.total_slots:
            raise IndexError("episode metrics already full")
        self.reward[t] = sum(o.reward for o in outcomes)
        self.privacy[t] = sum(o.privacy for o in outcomes)
        self.energy_j[t] = sum(o.energy_j for o in outcomes)
        self.latency_s[t] = sum(o.latency_s for o in outcomes)
        self.cost[t] = sum(o.cost for o in outcomes)
        self.mining_reward[t] = sum(o.mining_reward for o in outcomes)
        self.deadline_violations[t] = sum(int(o.deadline_violated.sum()) for o in outcomes)
        self.offload_fraction[t] = float(np.mean([o.offload.mean() for o in outcomes]))
        self._t = t + 1

    @property
    def slots_recorded(self) -> int:
        return self._t

    def rolling_reward(self, window: int = 200) -> np.ndarray:
        return rolling_mean(self.reward[: self._t], window)

    def aggregates(self, tail: int | None = None) -> dict[str, float]:
        """Means over all recorded slots, or over the last ``tail`` slots."""
        stop = self._t
        start = 0 if tail is None else max(0, stop - tail)
        return {name: float(np.mean(getattr(self, name)[start:stop])) for name in SERIES}


def rolling_mean(x, window: int) -> np.ndarray:
    """Trailing mean; the first ``window - 1`` entries average what is available."""
    x = np.asarray(x, dtype=float)
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(len(x))
    lo = np.maximum(0, idx - window + 1)
    return (csum[idx + 1] - csum[lo]) / (idx + 1 - lo)


def convergence_slot(reward, window: int = 200, tail: int = 1000, tolerance: float = 0.05) -> int:
    """First slot from which the rolling reward mean never leaves the final band.

    The band is ``tolerance * |mean of the last tail slots|`` around that
    mean. Returns ``len(reward)`` when the last slot itself is outside.
    """
    reward = np.asarray(reward, dtype=float)
    if reward.size == 0:
        return 0
    final = reward[-tail:].mean()
    roll = rolling_mean(reward, window)
    band = tolerance * abs(final)
    outside = np.abs(roll - final) > band + 1e-12 * max(1.0, abs(final))
    if not outside.any():
        return 0
    return int(np.nonzero(outside)[0][-1] + 1)
