"""Property-based checks of the environment, network and metrics."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import checked_step
from mecchain.config import LearnerConfig, RewardMode, SimConfig
from mecchain.env import Channel, MecBlockchainEnv, Task, location_privacy, usage_pattern_privacy
from mecchain.metrics import EpisodeMetrics, rolling_mean
from mecchain.agents import make_agents, run_episode
from mecchain.agents.dqn import ReplayBuffer
from mecchain.agents.policies import action_to_bits, bits_to_action

configs = st.builds(
    SimConfig,
    num_miners=st.integers(1, 3),
    num_tasks=st.integers(1, 3),
    total_slots=st.just(12),
    beta=st.floats(0, 1),
    mec_servers=st.integers(1, 10),
    reward_mode=st.sampled_from(list(RewardMode)),
    deadline_penalty=st.sampled_from([0.0, 1.0]),
)


@settings(max_examples=150, deadline=None)
@given(cfg=configs, seed=st.integers(0, 2 ** 32), action_seed=st.integers(0, 2 ** 32))
def test_step_invariants_hold_for_random_action_sequences(cfg, seed, action_seed):
    env = MecBlockchainEnv(cfg)
    env.reset(seed)
    rng = np.random.default_rng(action_seed)
    while not env.done:
        checked_step(env, rng.integers(0, 2, size=(cfg.num_miners, cfg.num_tasks)))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 32), action_seed=st.integers(0, 2 ** 32))
def test_same_seed_and_actions_reproduce_every_outcome(seed, action_seed):
    cfg = SimConfig(num_miners=2, total_slots=15)
    runs = []
    for _ in range(2):
        env = MecBlockchainEnv(cfg)
        env.reset(seed)
        rng = np.random.default_rng(action_seed)
        trace = []
        while not env.done:
            for o in env.step(rng.integers(0, 2, size=(2, 2))):
                trace.append((o.reward, o.privacy, o.cost, o.latency_s, o.energy_j, o.mining_reward,
                              tuple(o.next_observation.buffered_bits)))
        runs.append(trace)
    assert runs[0] == runs[1]


@given(d1=st.floats(0, 2e6), d0=st.floats(0, 2e6), x=st.integers(0, 1), g=st.sampled_from(list(Channel)))
def test_privacy_terms_are_exclusive_and_non_negative(d1, d0, x, g):
    t = Task(d1, d0, 18000.0, 15.0)
    cfg = SimConfig()
    use, loc = usage_pattern_privacy(t, x, g, cfg), location_privacy(t, x, g, cfg)
    assert use >= 0 and loc in (0.0, 1.0)
    assert use * loc == 0


@given(st.integers(1, 8).flatmap(lambda m: st.tuples(st.just(m), st.integers(0, 2 ** m - 1))))
def test_action_encoding_round_trips(case):
    m, idx = case
    assert bits_to_action(action_to_bits(idx, m)) == idx


@given(capacity=st.integers(1, 20), pushes=st.integers(0, 60))
def test_replay_keeps_the_latest_transitions_in_order(capacity, pushes):
    buf = ReplayBuffer(capacity, 1)
    for k in range(pushes):
        buf.push([k], 0, float(k), [k + 1])
    s, _, r, _ = buf.ordered()
    kept = list(range(max(0, pushes - capacity), pushes))
    assert len(buf) == min(pushes, capacity)
    assert r.tolist() == [float(k) for k in kept]
    assert s[:, 0].tolist() == [float(k) for k in kept]


@given(x=st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=300), window=st.integers(1, 50))
def test_rolling_mean_matches_direct_average(x, window):
    roll = rolling_mean(x, window)
    for i in (0, len(x) // 2, len(x) - 1):
        lo = max(0, i - window + 1)
        assert np.isclose(roll[i], np.mean(x[lo:i + 1]), rtol=1e-9, atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000), policy=st.sampled_from(["NO", "EO", "RANDOM", "RLO"]))
def test_episode_aggregates_recompute_from_series(seed, policy):
    cfg = SimConfig(total_slots=40, num_miners=2)
    env = MecBlockchainEnv(cfg)
    env.reset(seed)
    m = run_episode(env, make_agents(policy, cfg, LearnerConfig(), seed))
    assert isinstance(m, EpisodeMetrics)
    agg = m.aggregates()
    for name, value in agg.items():
        assert len(getattr(m, name)) == cfg.total_slots
        assert abs(value - float(np.mean(getattr(m, name)))) <= 1e-12 * max(1.0, abs(value))
    # default reward form: privacy minus cost, summed over miners
    assert np.allclose(m.reward, m.privacy - m.cost, rtol=1e-12, atol=1e-12)
