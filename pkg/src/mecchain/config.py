"""Simulation constants for the MEC blockchain offloading model.

All sizes are in bits (1 kB = 8000 bits), times in seconds, energies in
joules and mining amounts in tokens.
"""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Any

KB = 8000.0


class ConfigError(ValueError):
    """Raised for an invalid configuration; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class RewardMode(str, enum.Enum):
    # privacy + mining - cost
    EQ17 = "eq17"
    # privacy - (beta * energy + (1 - beta) * latency)
    EQ21 = "eq21"


class MiningMode(str, enum.Enum):
    EXPECTED = "expected"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class SimConfig:
    num_miners: int = 1
    num_tasks: int = 2
    slot_duration: float = 1.0
    total_slots: int = 8000

    # offloading branch
    uplink_rate_bits_per_s: float = 1.0e6
    mec_capacity_cycles_per_s: float = 1.0e10
    mec_servers: int = 10
    cycles_per_bit: float = 18000.0
    deadline_s: float = 15.0
    miner_tx_power_w: float = 0.1
    mec_circuit_power_w: float = 0.05
    mec_energy_coeff: float = 1.0e-31

    # local branch
    local_time_s_per_bit: float = 4.75e-7
    local_energy_j_per_bit: float = 3.25e-7
    local_bit_budget_per_slot: float = 80 * KB

    # channel
    channel_good_threshold: float = 0.8
    channel_stay_prob: float = 0.95

    # privacy
    privacy_location_weight: float = 0.5
    privacy_unit_bits: float = 400 * KB

    # workload
    task_size_range_bits: tuple[float, float] = (50 * KB, 150 * KB)
    block_size_range_bits: tuple[float, float] = (5 * KB, 10 * KB)

    # mining
    miner_hash_range: tuple[float, float] = (2.0e7, 1.0e8)
    network_hash_range: tuple[float, float] = (1.0e12, 1.0e14)
    mining_reward_tokens: float = 30.0
    orphan_rate_eta: float = 1.0 / 600.0
    propagation_s_per_bit: float = 6.25e-5
    hash_price_tokens_per_hash_s: float = 1.0e-12
    mining_mode: MiningMode = MiningMode.EXPECTED

    # reward
    beta: float = 0.5
    reward_mode: RewardMode = RewardMode.EQ21
    reward_term_scales: tuple[float, float, float] = (1.0, 1.0, 1.0)
    deadline_penalty: float = 0.0

    rng_seed: int = 0

    def __post_init__(self) -> None:
        # coerce enums and sequences so configs built from plain data compare equal
        object.__setattr__(self, "reward_mode", RewardMode(self.reward_mode))
        object.__setattr__(self, "mining_mode", MiningMode(self.mining_mode))
        for name in ("task_size_range_bits", "block_size_range_bits",
                     "miner_hash_range", "network_hash_range", "reward_term_scales"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        self.validate()

    @property
    def energy_weight(self) -> float:
        return self.beta

    @property
    def latency_weight(self) -> float:
        return 1.0 - self.beta

    @property
    def mec_drain_cycles_per_s(self) -> float:
        return self.mec_servers * self.mec_capacity_cycles_per_s

    @property
    def num_actions(self) -> int:
        return 2 ** self.num_tasks

    def replace(self, **changes: Any) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, enum.Enum):
                v = v.value
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    def validate(self) -> None:
        def positive(name):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(name, f"must be a finite positive number, got {v!r}")

        def unit(name, open_low=False, open_high=False):
            v = getattr(self, name)
            lo_ok = v > 0 if open_low else v >= 0
            hi_ok = v < 1 if open_high else v <= 1
            if not (isinstance(v, (int, float)) and lo_ok and hi_ok):
                raise ConfigError(name, f"must lie in the unit interval, got {v!r}")

        def span(name, allow_zero=False):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi or lo < 0 or (lo == 0 and not allow_zero):
                raise ConfigError(name, f"expected 0 < min <= max, got {(lo, hi)!r}")

        for name in ("num_miners", "num_tasks", "total_slots", "mec_servers"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(name, f"must be a positive integer, got {v!r}")
        if self.num_tasks > 10:
            raise ConfigError("num_tasks", "at most 10 tasks per miner (action space is 2**M)")
        for name in ("slot_duration", "uplink_rate_bits_per_s", "mec_capacity_cycles_per_s",
                     "cycles_per_bit", "deadline_s", "miner_tx_power_w", "mec_circuit_power_w",
                     "mec_energy_coeff", "local_time_s_per_bit", "local_energy_j_per_bit",
                     "local_bit_budget_per_slot", "privacy_unit_bits", "mining_reward_tokens",
                     "orphan_rate_eta", "propagation_s_per_bit", "hash_price_tokens_per_hash_s"):
            positive(name)
        unit("channel_good_threshold")
        unit("channel_stay_prob")
        unit("privacy_location_weight", open_low=True, open_high=True)
        unit("beta")
        span("task_size_range_bits")
        span("block_size_range_bits", allow_zero=True)
        span("miner_hash_range")
        span("network_hash_range")
        if len(self.reward_term_scales) != 3 or any(w < 0 or not math.isfinite(w) for w in self.reward_term_scales):
            raise ConfigError("reward_term_scales", "expected three finite non-negative weights")
        if self.deadline_penalty < 0:
            raise ConfigError("deadline_penalty", "must be non-negative")
        if not isinstance(self.rng_seed, int) or self.rng_seed < 0 or self.rng_seed >= 2 ** 64:
            raise ConfigError("rng_seed", "must be an unsigned 64-bit integer")


FIELD_NAMES = frozenset(f.name for f in dataclasses.fields(SimConfig))


class Head(str, enum.Enum):
    # one linear output per joint action, read as Q-values
    QVALUES = "qvalues"
    # one sigmoid unit per task, thresholded at 0.5 to act
    RELAXED = "relaxed"


@dataclass(frozen=True)
class LearnerConfig:
    """Hyperparameters shared by the tabular and the deep learner."""

    gamma: float = 0.85
    q_learning_rate: float = 0.1
    dqn_learning_rate: float = 0.01
    replay_capacity: int = 100_000
    batch_size: int = 128
    hidden_layers: tuple[int, ...] = (300, 200)
    target_sync_period: int = 200
    head: Head = Head.QVALUES
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_slots: int = 2000
    state_bins: int = 10
    hash_bins: int = 4
    # per-task backlog treated as "full" by the discretizer and the network inputs
    buffer_range_bits: float = 150 * KB
    dqn_dtype: str = "float32"

    def __post_init__(self) -> None:
        object.__setattr__(self, "head", Head(self.head))
        object.__setattr__(self, "hidden_layers", tuple(int(h) for h in self.hidden_layers))
        self.validate()

    def replace(self, **changes: Any) -> "LearnerConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["head"] = self.head.value
        out["hidden_layers"] = list(self.hidden_layers)
        return out

    def validate(self) -> None:
        if not 0 < self.gamma < 1:
            raise ConfigError("gamma", f"must lie in (0, 1), got {self.gamma!r}")
        if not 0 < self.q_learning_rate <= 1:
            raise ConfigError("q_learning_rate", f"must lie in (0, 1], got {self.q_learning_rate!r}")
        if not self.dqn_learning_rate > 0:
            raise ConfigError("dqn_learning_rate", "must be positive")
        for name in ("replay_capacity", "batch_size", "target_sync_period", "state_bins", "hash_bins"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(name, f"must be a positive integer, got {v!r}")
        if self.batch_size > self.replay_capacity:
            raise ConfigError("batch_size", "cannot exceed replay_capacity")
        if not self.hidden_layers or any(h < 1 for h in self.hidden_layers):
            raise ConfigError("hidden_layers", "need at least one positive layer width")
        if not 0 <= self.epsilon_end <= self.epsilon_start <= 1:
            raise ConfigError("epsilon_start", "need 0 <= epsilon_end <= epsilon_start <= 1")
        if not isinstance(self.epsilon_decay_slots, int) or self.epsilon_decay_slots < 0:
            raise ConfigError("epsilon_decay_slots", "must be a non-negative integer")
        if not self.buffer_range_bits > 0:
            raise ConfigError("buffer_range_bits", "must be positive")
        if self.dqn_dtype not in ("float64", "float32"):
            raise ConfigError("dqn_dtype", "must be 'float64' or 'float32'")


LEARNER_FIELD_NAMES = frozenset(f.name for f in dataclasses.fields(LearnerConfig))
