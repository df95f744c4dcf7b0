"""Privacy-aware task offloading for miners in a MEC-enabled blockchain network.

Subpackages and modules:

* :mod:`mecchain.env`     slotted environment and the cost, privacy and mining model
* :mod:`mecchain.nn`      small numpy MLP with manual backpropagation
* :mod:`mecchain.agents`  NO/EO/RANDOM baselines, tabular Q-learning (RLO), DQN (DRLO)
* :mod:`mecchain.harness` experiment configs, seeded runs, CSV/JSON outputs, CLI
"""
from .config import KB, ConfigError, Head, LearnerConfig, MiningMode, RewardMode, SimConfig
from .env import Channel, MecBlockchainEnv, MinerState, StepOutcome, Task
from .metrics import EpisodeMetrics, convergence_slot, rolling_mean

__version__ = "0.1.0"

__all__ = [
    "Channel", "ConfigError", "EpisodeMetrics", "Head", "KB", "LearnerConfig", "MecBlockchainEnv",
    "MinerState", "MiningMode", "RewardMode", "SimConfig", "StepOutcome", "Task", "convergence_slot",
    "rolling_mean",
]
