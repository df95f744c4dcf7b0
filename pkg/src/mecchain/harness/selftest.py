"""Quick oracle checks runnable from the command line.

These are abbreviated versions of the test-suite oracles: a finite
difference gradient check, Q-learning against value iteration, and the
hand-computed cost-model examples.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..config import SimConfig
from ..env import (MinerState, ServerQueue, Task, local_cost, mining_reward, offload_cost,
                   processing_delay, queuing_latency, total_privacy, uplink_latency,
                   usage_pattern_privacy, win_probability)
from ..nn import IDENTITY, SIGMOID, Mlp, grad_check, squared_loss
from ..oracles import bellman_suite, q_learn_mdp, value_iteration


def check_gradients() -> tuple[bool, str]:
    rng = np.random.default_rng(7)
    worst = 0.0
    for sizes, act in (([4, 8, 3], IDENTITY), ([5, 6, 4, 2], SIGMOID), ([3, 16, 8, 4], IDENTITY)):
        net = Mlp(sizes, act, rng=rng)
        x = rng.normal(size=(2, sizes[0]))
        worst = max(worst, grad_check(net, x, squared_loss(rng.normal(size=(2, sizes[-1])))))
    return worst < 1e-4, f"max relative error {worst:.2e}"


def check_bellman() -> tuple[bool, str]:
    rng = np.random.default_rng(11)
    worst, greedy_ok = 0.0, True
    for mdp in bellman_suite():
        q_star = value_iteration(mdp, 0.85)
        table = q_learn_mdp(mdp, 0.85, 0.1, 20_000, rng)
        worst = max(worst, float(np.max(np.abs(table.values - q_star))))
        greedy_ok &= bool(np.array_equal(table.values.argmax(axis=1), q_star.argmax(axis=1)))
    return worst < 1e-3 and greedy_ok, f"max |Q - Q*| {worst:.2e}, greedy policies match: {greedy_ok}"


def check_cost_model() -> tuple[bool, str]:
    cfg = SimConfig(mec_servers=1, mec_energy_coeff=1e-26)
    task = Task(new_bits=8e5, buffered_bits=0.0, cycles_per_bit=18000, deadline_s=15)
    latency, energy = offload_cost(task, ServerQueue(0.0), cfg)
    cases = [
        ("uplink", uplink_latency(task, cfg), 0.8),
        ("queue", queuing_latency(ServerQueue(2e10), cfg), 2.0),
        ("processing", processing_delay(task, cfg), 1.44),
        ("offload latency", latency, 2.24),
        ("offload energy", energy, 0.1 * 0.8 + 1.44e4),
        ("local latency", local_cost(task, cfg)[0], 0.38),
        ("local energy", local_cost(task, cfg)[1], 0.26),
        ("usage privacy", usage_pattern_privacy(Task(640000, 160000, 18000, 15), 1, 1, cfg), 640000),
        ("total privacy", total_privacy(0.0, 1.0, cfg), 0.5),
        ("win probability", win_probability(6e7, 5 / cfg.propagation_s_per_bit, 1e13, cfg), 6e-6 * math.exp(-5 / 600)),
        ("mining reward", mining_reward(MinerState(np.zeros(1), np.zeros(1), 1, 6e7, 0.0),
                                        5 / cfg.propagation_s_per_bit, 1e13, cfg), 30 * 6e-6 * math.exp(-5 / 600)),
    ]
    bad = [name for name, got, want in cases if abs(got - want) > 1e-12 * abs(want)]
    return not bad, "all match" if not bad else f"mismatch: {', '.join(bad)}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "gradient check": check_gradients,
    "bellman oracle": check_bellman,
    "cost model": check_cost_model,
}


def run_selftest(echo=print) -> bool:
    ok = True
    for name, check in CHECKS.items():
        passed, detail = check()
        ok &= passed
        echo(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    return ok
