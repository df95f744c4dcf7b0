"""Slotted MEC blockchain environment.

Each miner holds ``M`` data-processing tasks per slot. A task is either
uploaded to the shared edge server (``x = 1``) or processed on the device
(``x = 0``). The cost model functions below are plain arithmetic and accept
numpy arrays wherever a scalar bit count is expected, which is how
:class:`MecBlockchainEnv` evaluates all tasks of a slot at once.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import MiningMode, RewardMode, SimConfig


class Channel(enum.IntEnum):
    BAD = 0
    GOOD = 1


# the two-state chain only ever holds a Channel value
ChannelState = Channel


@dataclass
class Task:
    new_bits: float
    buffered_bits: float
    cycles_per_bit: float
    deadline_s: float

    @property
    def total_bits(self):
        return self.buffered_bits + self.new_bits


@dataclass
class ServerQueue:
    pending_cycles: float = 0.0


@dataclass
class MinerState:
    """What miner ``n`` observes at the start of a slot."""

    new_bits: np.ndarray
    buffered_bits: np.ndarray
    channel: Channel
    hash_power: float
    payment: float

    @property
    def tasks(self) -> list[Task]:
        return [Task(float(d1), float(d0), np.nan, np.nan)
                for d1, d0 in zip(self.new_bits, self.buffered_bits)]


Observation = MinerState


@dataclass
class StepOutcome:
    reward: float
    privacy: float
    mining_reward: float
    latency_s: float
    energy_j: float
    cost: float
    deadline_violated: np.ndarray
    offload: np.ndarray
    branch_latency_s: np.ndarray
    branch_energy_j: np.ndarray
    usage_privacy: np.ndarray
    location_privacy: np.ndarray
    next_observation: MinerState | None = None


# -- channel and workload ---------------------------------------------------

def step_channel(state: Channel, rng: np.random.Generator, stay_prob: float) -> Channel:
    if rng.random() < stay_prob:
        return Channel(state)
    return Channel(1 - int(state))


def generate_task(rng: np.random.Generator, config: SimConfig, carryover_bits: float = 0.0) -> Task:
    if carryover_bits < 0:
        raise ValueError("carryover_bits must be non-negative")
    lo, hi = config.task_size_range_bits
    return Task(new_bits=float(rng.uniform(lo, hi)), buffered_bits=float(carryover_bits),
                cycles_per_bit=config.cycles_per_bit, deadline_s=config.deadline_s)


# -- offloading branch ------------------------------------------------------

def uplink_latency(task: Task, config: SimConfig):
    return (task.buffered_bits + task.new_bits) / config.uplink_rate_bits_per_s


def queuing_latency(queue: ServerQueue, config: SimConfig):
    # backlog is worked off by all server units in parallel
    return queue.pending_cycles / config.mec_drain_cycles_per_s


def processing_delay(task: Task, config: SimConfig):
    return (task.buffered_bits + task.new_bits) * config.cycles_per_bit / config.mec_capacity_cycles_per_s


def offload_cost(task: Task, queue: ServerQueue, config: SimConfig):
    """Return ``(latency, energy)`` of uploading, queuing and executing ``task`` remotely."""
    l_u = uplink_latency(task, config)
    l_p = processing_delay(task, config)
    l_q = queuing_latency(queue, config)
    f = config.mec_capacity_cycles_per_s
    energy = (config.miner_tx_power_w * l_u
              + config.mec_energy_coeff * f ** 3 * l_p
              + config.mec_circuit_power_w * l_q)
    return l_u + l_p + l_q, energy


def local_cost(task: Task, config: SimConfig):
    bits = task.buffered_bits + task.new_bits
    return bits * config.local_time_s_per_bit, bits * config.local_energy_j_per_bit


# -- privacy ----------------------------------------------------------------

def _is_good(g, config: SimConfig):
    # g is binary, so comparing against the good-gain threshold reduces to g == GOOD
    return np.asarray(g) >= max(config.channel_good_threshold, 1e-12)


def usage_pattern_privacy(task: Task, x, g, config: SimConfig):
    gap = np.abs(task.buffered_bits - x * (task.buffered_bits + task.new_bits))
    return gap * _is_good(g, config)


def location_privacy(task: Task, x, g, config: SimConfig | None = None):
    threshold = 0.8 if config is None else config.channel_good_threshold
    offloaded = x * (task.buffered_bits + task.new_bits) > 0
    bad = np.asarray(g) < max(threshold, 1e-12)
    return (offloaded & bad).astype(float) if isinstance(offloaded, np.ndarray) else float(offloaded and bad)


def total_privacy(usage, location, config: SimConfig):
    return usage + config.privacy_location_weight * location


# -- mining -----------------------------------------------------------------

def win_probability(hash_power: float, block_size_bits: float, network_hash: float,
                    config: SimConfig) -> float:
    if network_hash <= 0:
        raise ValueError("network hash power must be positive")
    if block_size_bits < 0:
        raise ValueError("block size must be non-negative")
    share = hash_power / network_hash
    propagation = config.propagation_s_per_bit * block_size_bits
    return share * np.exp(-config.orphan_rate_eta * propagation)


def mining_reward(miner: MinerState, block_size_bits: float, network_hash: float,
                  config: SimConfig, rng: np.random.Generator | None = None) -> float:
    p_win = win_probability(miner.hash_power, block_size_bits, network_hash, config)
    if config.mining_mode is MiningMode.SAMPLED:
        if rng is None:
            raise ValueError("sampled mining mode needs an rng")
        won = rng.random() < p_win
        return (config.mining_reward_tokens if won else 0.0) - miner.payment
    return config.mining_reward_tokens * p_win - miner.payment


# -- aggregation ------------------------------------------------------------

def aggregate_latency(offload_latencies: Sequence[float], local_latencies: Sequence[float]) -> float:
    out = 0.0
    for branch in (offload_latencies, local_latencies):
        if len(branch):
            out = max(out, float(np.max(branch)))
    return out


def system_cost(energies, latency, config: SimConfig) -> float:
    """Weighted energy/latency cost of one miner.

    ``energies`` holds the energy of each task on the branch it was routed
    to; ``latency`` is the miner's aggregate latency, charged once per task.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    return float(np.sum(config.energy_weight * energies + config.latency_weight * latency))


def compose_reward(privacy: float, mining: float, cost: float, violations: int,
                   config: SimConfig) -> float:
    w_p, w_r, w_c = config.reward_term_scales
    r = w_p * privacy - w_c * cost
    if config.reward_mode is RewardMode.EQ17:
        r = w_p * privacy + w_r * mining - w_c * cost
    return r - config.deadline_penalty * violations


# -- environment ------------------------------------------------------------

class EpisodeFinished(RuntimeError):
    pass


class MecBlockchainEnv:
    """Multi-miner environment sharing one edge server queue.

    Queue arrivals within a slot are appended task by task in miner-index
    order; every offloaded task waits behind the backlog present when it
    arrives.
    """

    def __init__(self, config: SimConfig):
        config.validate()
        self.config = config
        self.t = 0
        self._ready = False

    # state accessors ---------------------------------------------------
    @property
    def num_miners(self) -> int:
        return self.config.num_miners

    @property
    def num_tasks(self) -> int:
        return self.config.num_tasks

    @property
    def done(self) -> bool:
        return self.t >= self.config.total_slots

    def observation(self, n: int) -> MinerState:
        return MinerState(new_bits=self.new_bits[n].copy(), buffered_bits=self.buffered_bits[n].copy(),
                          channel=Channel(int(self.channel[n])), hash_power=float(self.hash_power[n]),
                          payment=float(self.payment[n]))

    def observations(self) -> list[MinerState]:
        return [self.observation(n) for n in range(self.num_miners)]

    # dynamics ----------------------------------------------------------
    def reset(self, rng_seed: int | None = None) -> list[MinerState]:
        cfg = self.config
        seed = cfg.rng_seed if rng_seed is None else rng_seed
        self.rng = np.random.default_rng(seed)
        n, m = cfg.num_miners, cfg.num_tasks
        self.t = 0
        self.queue = ServerQueue(0.0)
        self.channel = self.rng.integers(0, 2, size=n)
        self.buffered_bits = np.zeros((n, m))
        self.new_bits = self.rng.uniform(*cfg.task_size_range_bits, size=(n, m))
        self.hash_power = self.rng.uniform(*cfg.miner_hash_range, size=n)
        self.payment = cfg.hash_price_tokens_per_hash_s * self.hash_power
        self.network_hash = float(self.rng.uniform(*cfg.network_hash_range))
        self._ready = True
        return self.observations()

    def step(self, actions) -> list[StepOutcome]:
        if not self._ready:
            raise RuntimeError("call reset() before step()")
        if self.done:
            raise EpisodeFinished(f"episode already ran {self.config.total_slots} slots")
        cfg = self.config
        n_m, m_t = cfg.num_miners, cfg.num_tasks
        x = np.asarray(actions)
        if x.shape != (n_m, m_t):
            raise ValueError(f"expected actions of shape {(n_m, m_t)}, got {x.shape}")
        if not np.all((x == 0) | (x == 1)):
            raise ValueError("offloading decisions must be 0 or 1")
        x = x.astype(float)

        d0, d1 = self.buffered_bits, self.new_bits
        bits = d0 + d1
        task = Task(new_bits=d1, buffered_bits=d0, cycles_per_bit=cfg.cycles_per_bit,
                    deadline_s=cfg.deadline_s)

        # FIFO arrivals in (miner, task) order
        added = (x * bits * cfg.cycles_per_bit).ravel()
        ahead = self.queue.pending_cycles + np.concatenate([[0.0], np.cumsum(added)[:-1]])
        snapshot = ServerQueue(ahead.reshape(n_m, m_t))
        lat_o, en_o = offload_cost(task, snapshot, cfg)
        lat_l, en_l = local_cost(task, cfg)
        offloaded = x == 1
        branch_lat = np.where(offloaded, lat_o, lat_l)
        branch_en = np.where(offloaded, en_o, en_l)
        violated = branch_lat > cfg.deadline_s

        g = self.channel[:, None]
        p_use = usage_pattern_privacy(task, x, g, cfg)
        p_loc = location_privacy(task, x, g, cfg)
        privacy = (p_use / cfg.privacy_unit_bits + cfg.privacy_location_weight * p_loc).sum(axis=1)

        block = self.rng.uniform(*cfg.block_size_range_bits)
        mining_rng = self.rng if cfg.mining_mode is MiningMode.SAMPLED else None
        miners = [MinerState(d1[i], d0[i], Channel(int(self.channel[i])), float(self.hash_power[i]),
                             float(self.payment[i])) for i in range(n_m)]

        outcomes = []
        for i in range(n_m):
            latency = float(branch_lat[i].max())
            cost = system_cost(branch_en[i], latency, cfg)
            mine = mining_reward(miners[i], block, self.network_hash, cfg, mining_rng)
            n_viol = int(violated[i].sum())
            reward = compose_reward(float(privacy[i]), mine, cost, n_viol, cfg)
            outcomes.append(StepOutcome(
                reward=reward, privacy=float(privacy[i]), mining_reward=mine, latency_s=latency,
                energy_j=float(branch_en[i].sum()), cost=cost, deadline_violated=violated[i],
                offload=x[i].astype(np.int8), branch_latency_s=branch_lat[i], branch_energy_j=branch_en[i],
                usage_privacy=p_use[i], location_privacy=p_loc[i]))

        # advance the system
        processed = np.where(offloaded, bits, np.minimum(bits, cfg.local_bit_budget_per_slot))
        self.buffered_bits = np.maximum(0.0, bits - processed)
        drain = cfg.mec_drain_cycles_per_s * cfg.slot_duration
        self.queue = ServerQueue(max(0.0, self.queue.pending_cycles + float(added.sum()) - drain))
        stay = self.rng.random(n_m) < cfg.channel_stay_prob
        self.channel = np.where(stay, self.channel, 1 - self.channel)
        self.new_bits = self.rng.uniform(*cfg.task_size_range_bits, size=(n_m, m_t))
        self.t += 1

        for i, out in enumerate(outcomes):
            out.next_observation = self.observation(i)
        return outcomes
