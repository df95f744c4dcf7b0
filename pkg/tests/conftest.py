import numpy as np

from mecchain.env import compose_reward, system_cost


def checked_step(env, actions):
    """Step ``env`` and assert the conservation and decomposition invariants.

    Returns the outcomes so callers can continue the episode.
    """
    cfg = env.config
    x = np.asarray(actions)
    q0 = env.queue.pending_cycles
    bits = env.buffered_bits + env.new_bits
    outs = env.step(x)

    added = float(np.sum(x * bits * cfg.cycles_per_bit))
    drain = cfg.mec_drain_cycles_per_s * cfg.slot_duration
    assert env.queue.pending_cycles == max(0.0, q0 + added - drain)

    processed = np.where(x == 1, bits, np.minimum(bits, cfg.local_bit_budget_per_slot))
    assert np.array_equal(env.buffered_bits, np.maximum(0.0, bits - processed))

    for out in outs:
        assert np.all(out.usage_privacy * out.location_privacy == 0)
        assert out.privacy >= 0 and out.latency_s >= 0 and out.energy_j >= 0
        assert out.latency_s == float(out.branch_latency_s.max())
        assert out.cost == system_cost(out.branch_energy_j, out.latency_s, cfg)
        n_viol = int(out.deadline_violated.sum())
        assert out.reward == compose_reward(out.privacy, out.mining_reward, out.cost, n_viol, cfg)
    return outs


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
