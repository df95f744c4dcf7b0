"""Offloading policies: fixed baselines, tabular Q-learning and DQN.

Every miner runs its own agent; agents interact only through the shared
server queue of the environment.
"""
from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from ..config import LearnerConfig, SimConfig
from ..env import MecBlockchainEnv
from ..metrics import EpisodeMetrics
from ..nn import params_from_bytes, params_to_bytes
from .dqn import DqnAgent, ReplayBuffer, dqn_train_step
from .policies import (Baseline, BaselineAgent, EpsilonSchedule, action_table, action_to_bits,
                       baseline_policy, bits_to_action, epsilon_greedy, features)
from .tabular import QTable, RloAgent, Transition, discretize, num_states, q_update

POLICIES = ("NO", "EO", "RANDOM", "RLO", "DRLO")


def run_episode(env: MecBlockchainEnv, agents: Sequence) -> EpisodeMetrics:
    """Drive a freshly reset environment to its last slot.

    Each agent exposes ``act(obs) -> action index`` and
    ``observe(obs, action, reward, next_obs)``.
    """
    if len(agents) != env.num_miners:
        raise ValueError(f"need one agent per miner ({env.num_miners}), got {len(agents)}")
    if env.t != 0:
        raise RuntimeError("environment must be freshly reset")
    metrics = EpisodeMetrics(env.config.total_slots)
    codes = action_table(env.num_tasks)
    obs = env.observations()
    while not env.done:
        chosen = [agent.act(o) for agent, o in zip(agents, obs)]
        outcomes = env.step(codes[chosen])
        for agent, o, a, out in zip(agents, obs, chosen, outcomes):
            agent.observe(o, a, out.reward, out.next_observation)
        metrics.record(outcomes)
        obs = [out.next_observation for out in outcomes]
    for agent in agents:
        metrics.train_loss.extend(getattr(agent, "losses", ()))
    return metrics


def _per_miner(env, items):
    if not isinstance(items, (list, tuple)):
        items = [items]
    if len(items) != env.num_miners:
        raise ValueError(f"need one entry per miner ({env.num_miners}), got {len(items)}")
    return items


def rlo_episode(env: MecBlockchainEnv, tables, schedule: EpsilonSchedule,
                rng: np.random.Generator, learner: LearnerConfig | None = None) -> EpisodeMetrics:
    learner = learner or LearnerConfig()
    tables = _per_miner(env, tables)
    agents = [RloAgent(env.config, learner, rng, table=t, schedule=schedule) for t in tables]
    return run_episode(env, agents)


def drlo_episode(env: MecBlockchainEnv, agents, schedule: EpsilonSchedule | None = None,
                 rng: np.random.Generator | None = None) -> EpisodeMetrics:
    agents = _per_miner(env, agents)
    for agent in agents:
        if schedule is not None:
            agent.schedule = schedule
        if rng is not None:
            agent.rng = rng
    return run_episode(env, agents)


def make_agents(policy: str, sim: SimConfig, learner: LearnerConfig, seed: int) -> list:
    """One agent per miner, each with its own random stream derived from ``seed``."""
    policy = policy.upper()
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(sim.num_miners)]
    if policy in ("NO", "EO", "RANDOM"):
        return [BaselineAgent(policy, r) for r in streams]
    if policy == "RLO":
        return [RloAgent(sim, learner, r) for r in streams]
    if policy == "DRLO":
        return [DqnAgent(sim, learner, r) for r in streams]
    raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")


def checkpoint(agent) -> tuple[str, bytes] | None:
    """``(suffix, payload)`` holding a learner's current policy; ``None`` for baselines.

    Q-tables are JSON, networks use the binary MLP layout of :mod:`mecchain.nn`.
    """
    if isinstance(agent, RloAgent):
        return ".json", (json.dumps(agent.table.to_dict(), sort_keys=True) + "\n").encode()
    if isinstance(agent, DqnAgent):
        return ".bin", params_to_bytes(agent.online)
    return None


def restore(agent, payload: bytes, source: str = "checkpoint") -> None:
    """Load a payload written by :func:`checkpoint` into a matching agent."""
    if isinstance(agent, RloAgent):
        table = QTable.from_dict(json.loads(payload))
        if table.values.shape != agent.table.values.shape:
            raise ValueError(f"{source}: Q-table shape {table.values.shape} does not match "
                             f"{agent.table.values.shape}")
        agent.table.values[...] = table.values
    elif isinstance(agent, DqnAgent):
        net = params_from_bytes(payload, source=source)
        if net.layer_sizes != agent.online.layer_sizes or net.output_activation != agent.online.output_activation:
            raise ValueError(f"{source}: network {net.layer_sizes} does not match {agent.online.layer_sizes}")
        agent.online.load_params_from(net)
        agent.sync_target()
    else:
        raise ValueError(f"{source}: baseline policies have no parameters to load")


__all__ = [
    "Baseline", "BaselineAgent", "DqnAgent", "EpsilonSchedule", "POLICIES", "QTable", "ReplayBuffer",
    "RloAgent", "Transition", "action_table", "action_to_bits", "baseline_policy", "bits_to_action",
    "checkpoint", "discretize", "dqn_train_step", "drlo_episode", "epsilon_greedy", "features", "make_agents",
    "num_states", "q_update", "restore", "rlo_episode", "run_episode",
]
