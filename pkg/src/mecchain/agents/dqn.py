"""Deep Q-network learner (DRLO): replay memory, target network, SGD."""
from __future__ import annotations

import numpy as np

from ..config import Head, LearnerConfig, SimConfig
from ..nn import IDENTITY, SIGMOID, Mlp, backward, forward, sgd_step
from .policies import EpsilonSchedule, action_table, epsilon_greedy, feature_size, features


class ReplayBuffer:
    """Fixed-capacity ring of ``(s, a, r, s')`` rows."""

    def __init__(self, capacity: int, state_dim: int, dtype=np.float64):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim), dtype=dtype)
        self.next_states = np.zeros((capacity, state_dim), dtype=dtype)
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity, dtype=dtype)
        self.cursor = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def push(self, state, action: int, reward: float, next_state) -> None:
        if not (np.all(np.isfinite(state)) and np.all(np.isfinite(next_state)) and np.isfinite(reward)):
            raise ValueError("transition contains non-finite values")
        i = self.cursor
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if batch_size > self.size:
            raise ValueError(f"cannot draw {batch_size} from {self.size} stored transitions")
        return rng.choice(self.size, size=batch_size, replace=False)

    def sample(self, batch_size: int, rng: np.random.Generator):
        idx = self.sample_indices(batch_size, rng)
        return self.states[idx], self.actions[idx], self.rewards[idx], self.next_states[idx]

    def ordered(self):
        """Stored rows oldest first."""
        if self.size < self.capacity:
            order = np.arange(self.size)
        else:
            order = (np.arange(self.capacity) + self.cursor) % self.capacity
        return self.states[order], self.actions[order], self.rewards[order], self.next_states[order]


class DqnAgent:
    """One miner's deep Q-learner.

    ``featurize`` maps an observation to the network input; by default it is
    :func:`features` over a :class:`MinerState`, but any callable returning a
    vector of length ``n_inputs`` works (the toy oracle environments use this).
    """

    def __init__(self, sim: SimConfig, learner: LearnerConfig, rng: np.random.Generator,
                 schedule: EpsilonSchedule | None = None, online: Mlp | None = None,
                 featurize=None, n_inputs: int | None = None):
        self.sim = sim
        self.learner = learner
        self.rng = rng
        self.schedule = schedule or EpsilonSchedule.from_config(learner)
        self.head = learner.head
        dtype = np.dtype(learner.dqn_dtype)
        if featurize is None:
            self._featurize = lambda obs: features(obs, sim, learner)
            n_in = feature_size(sim)
        else:
            if n_inputs is None:
                raise ValueError("a custom featurize needs n_inputs")
            self._featurize = featurize
            n_in = n_inputs
        if self.head is Head.QVALUES:
            sizes = [n_in, *learner.hidden_layers, sim.num_actions]
            activation = IDENTITY
        else:
            sizes = [n_in, *learner.hidden_layers, sim.num_tasks]
            activation = SIGMOID
        self.online = online if online is not None else Mlp(sizes, activation, rng=rng, dtype=dtype)
        if self.online.layer_sizes != sizes:
            raise ValueError(f"network topology {self.online.layer_sizes} does not match {sizes}")
        self.target = self.online.copy()
        self.replay = ReplayBuffer(learner.replay_capacity, n_in, dtype=dtype)
        self.batch_size = learner.batch_size
        self.gamma = learner.gamma
        self.learning_rate = learner.dqn_learning_rate
        self.target_sync_period = learner.target_sync_period
        self._actions = action_table(sim.num_tasks).astype(dtype)
        # max_a' Q_target(s', a') per replay row; valid until the next target sync
        self._target_max = np.zeros(learner.replay_capacity, dtype=dtype)
        self.train_steps = 0
        self.t = 0
        self.losses: list[float] = []

    # values -------------------------------------------------------------
    def action_values(self, net: Mlp, states) -> np.ndarray:
        """Per-joint-action values for a batch of feature rows."""
        out = net(states)
        if self.head is Head.QVALUES:
            return out
        # relaxed head: a joint action is worth the mean of its task-wise choices
        return _relaxed_values(out, self._actions)

    def sync_target(self) -> None:
        """Copy online weights into the target net and refresh the cached targets."""
        self.target.load_params_from(self.online)
        n = len(self.replay)
        if n:
            self._target_max[:n] = self.action_values(self.target, self.replay.next_states[:n]).max(axis=1)

    def greedy(self, obs) -> int:
        return int(np.argmax(self.action_values(self.online, self.features(obs))))

    def features(self, obs) -> np.ndarray:
        return self._featurize(obs)

    # interaction --------------------------------------------------------
    def act(self, obs) -> int:
        eps = self.schedule(self.t)
        u = self.rng.random()
        if u < eps:
            return int(self.rng.integers(self.sim.num_actions))
        return self.greedy(obs)

    def observe(self, obs, action, reward, next_obs) -> None:
        slot = self.replay.cursor
        nxt = self.features(next_obs)
        self.replay.push(self.features(obs), action, reward, nxt)
        self._target_max[slot] = self.action_values(self.target, nxt).max()
        self.t += 1
        loss = dqn_train_step(self, self.rng)
        if loss is not None:
            self.losses.append(loss)


def _relaxed_values(out, actions):
    chosen = actions[None, :, :] * out[:, None, :] + (1 - actions[None, :, :]) * (1 - out[:, None, :])
    return chosen.mean(axis=2)


def dqn_train_step(agent: DqnAgent, rng: np.random.Generator) -> float | None:
    """One minibatch SGD step on the squared TD error; ``None`` while replay is cold."""
    if len(agent.replay) < agent.batch_size:
        return None
    idx = agent.replay.sample_indices(agent.batch_size, rng)
    s, a, r = agent.replay.states[idx], agent.replay.actions[idx], agent.replay.rewards[idx]
    # the target net is frozen between syncs, so its max over next states is cached per row
    y = r + agent.gamma * agent._target_max[idx]

    out, tape = forward(agent.online, s)
    rows = np.arange(len(a))
    if agent.head is Head.QVALUES:
        pred = out[rows, a]
        diff = pred - y
        grad_out = np.zeros_like(out)
        grad_out[rows, a] = 2.0 * diff / len(a)
    else:
        bits = agent._actions[a]
        chosen = bits * out + (1 - bits) * (1 - out)
        pred = chosen.mean(axis=1)
        diff = pred - y
        # d pred / d out_m = (2 x_m - 1) / M
        grad_out = (2.0 * diff / len(a))[:, None] * (2 * bits - 1) / bits.shape[1]
    loss = float(np.mean(diff ** 2))
    grads = backward(agent.online, tape, grad_out)
    sgd_step(agent.online, grads, agent.learning_rate)
    agent.train_steps += 1
    if agent.train_steps % agent.target_sync_period == 0:
        agent.sync_target()
    return loss
