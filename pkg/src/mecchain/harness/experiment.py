"""Experiment specifications and their YAML config files.

A config file has four optional sections plus a few scalars::

    policy: DRLO              # or a list such as [NO, EO, RLO, DRLO]
    runs_per_point: 50
    seed: 0
    sim: {num_miners: 5}      # any SimConfig field
    learner: {gamma: 0.85}    # any LearnerConfig field
    sweep: {beta: [0.5, 0.8]} # axes from SWEEP_AXES
    save_policies: false      # write learned Q-tables / networks under policies/
    load_policies: null       # or a directory written by save_policies, to warm-start

Anything missing takes the library default. Unknown keys are rejected.
"""
from __future__ import annotations

import dataclasses
import hashlib
import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from ..agents import POLICIES
from ..config import FIELD_NAMES, KB, LEARNER_FIELD_NAMES, ConfigError, LearnerConfig, SimConfig

# sweep axis -> how a value is applied to the simulation config
SWEEP_AXES = ("beta", "num_miners", "num_tasks", "task_size_kb")

TOP_LEVEL_KEYS = frozenset({"policy", "runs_per_point", "seed", "output_dir", "aggregate_tail",
                            "workers", "write_series", "save_policies", "load_policies",
                            "sim", "learner", "sweep"})


def apply_axis(sim: SimConfig, axis: str, value) -> SimConfig:
    if axis == "task_size_kb":
        # tasks are drawn uniformly from [0.5, 1.5] times the nominal size
        size = float(value) * KB
        return sim.replace(task_size_range_bits=(0.5 * size, 1.5 * size))
    if axis == "beta":
        return sim.replace(beta=float(value))
    if axis in ("num_miners", "num_tasks"):
        if float(value) != int(value):
            raise ConfigError(f"sweep.{axis}", f"expected integers, got {value!r}")
        return sim.replace(**{axis: int(value)})
    raise ConfigError("sweep", f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def derive_seed(seed_base: int, point: int, run: int) -> int:
    """Run seed for sweep point ``point`` and run ``run``: base XOR a hash of the pair."""
    digest = hashlib.blake2b(f"{point}:{run}".encode(), digest_size=8).digest()
    return (seed_base ^ int.from_bytes(digest, "little")) % 2 ** 63


@dataclass(frozen=True)
class ExperimentSpec:
    sim: SimConfig = field(default_factory=SimConfig)
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    policies: tuple[str, ...] = ("DRLO",)
    sweep: tuple[tuple[str, tuple], ...] = ()
    runs_per_point: int = 50
    seed: int = 0
    output_dir: str = "results"
    # aggregate over the last this-many slots; None means the whole episode
    aggregate_tail: int | None = None
    workers: int = 1
    write_series: bool = True
    # write each learner's final Q-table or network under policies/
    save_policies: bool = False
    # warm-start learners from a previous experiment's policies/ directory
    load_policies: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "policies", tuple(p.upper() for p in self.policies))
        object.__setattr__(self, "sweep", tuple((a, tuple(v)) for a, v in self.sweep))
        self.validate()

    def validate(self) -> None:
        if not self.policies:
            raise ConfigError("policy", "at least one policy is required")
        for p in self.policies:
            if p not in POLICIES:
                raise ConfigError("policy", f"unknown policy {p!r}; expected one of {POLICIES}")
        if len(set(self.policies)) != len(self.policies):
            raise ConfigError("policy", "policies must be distinct")
        if not isinstance(self.runs_per_point, int) or self.runs_per_point < 1:
            raise ConfigError("runs_per_point", f"must be a positive integer, got {self.runs_per_point!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 63:
            raise ConfigError("seed", "must be a non-negative 63-bit integer")
        for name in ("write_series", "save_policies"):
            if not isinstance(getattr(self, name), bool):
                raise ConfigError(name, "must be true or false")
        if self.load_policies is not None and not isinstance(self.load_policies, str):
            raise ConfigError("load_policies", "must be a directory path")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers", "must be a positive integer")
        if self.aggregate_tail is not None and (not isinstance(self.aggregate_tail, int) or self.aggregate_tail < 1):
            raise ConfigError("aggregate_tail", "must be a positive integer or null")
        seen = set()
        for axis, values in self.sweep:
            if axis not in SWEEP_AXES:
                raise ConfigError("sweep", f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
            if axis in seen:
                raise ConfigError(f"sweep.{axis}", "axis listed twice")
            seen.add(axis)
            if not values:
                raise ConfigError(f"sweep.{axis}", "sweep axis must not be empty")
        for point in self.points():
            self.sim_for(point)  # surfaces out-of-range sweep values early

    @property
    def axis_names(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.sweep)

    def points(self) -> list[dict[str, Any]]:
        """Cartesian product of the sweep axes, first axis slowest."""
        names = self.axis_names
        return [dict(zip(names, combo)) for combo in itertools.product(*(v for _, v in self.sweep))]

    def sim_for(self, point: Mapping[str, Any]) -> SimConfig:
        sim = self.sim
        for axis, value in point.items():
            try:
                sim = apply_axis(sim, axis, value)
            except ConfigError as err:
                if err.field.startswith("sweep"):
                    raise
                raise ConfigError(f"sweep.{axis}", str(err)) from None
        return sim

    def run_seed(self, point: int, run: int) -> int:
        return derive_seed(self.seed, point, run)

    def replace(self, **changes) -> "ExperimentSpec":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "policy": list(self.policies),
            "runs_per_point": self.runs_per_point,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "aggregate_tail": self.aggregate_tail,
            "workers": self.workers,
            "write_series": self.write_series,
            "save_policies": self.save_policies,
            "load_policies": self.load_policies,
            "sim": self.sim.to_dict(),
            "learner": self.learner.to_dict(),
            "sweep": {a: list(v) for a, v in self.sweep},
        }


def _section(data, name: str, allowed) -> dict:
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(name, "expected a mapping")
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{name}.{key}", f"unknown key {key!r}")
    return dict(data)


def _build(cls, name: str, values: dict):
    try:
        return cls(**values)
    except ConfigError as err:
        raise ConfigError(f"{name}.{err.field}", str(err).split(": ", 1)[-1]) from None
    except (TypeError, ValueError) as err:
        raise ConfigError(name, str(err)) from None


def spec_from_dict(data: Mapping[str, Any] | None) -> ExperimentSpec:
    """Build a spec from parsed config data, rejecting unknown keys by name."""
    data = {} if data is None else data
    if not isinstance(data, Mapping):
        raise ConfigError("<root>", "config must be a mapping of keys to values")
    for key in data:
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError(str(key), f"unknown key {key!r}")
    sim = _build(SimConfig, "sim", _section(data.get("sim"), "sim", FIELD_NAMES))
    learner = _build(LearnerConfig, "learner", _section(data.get("learner"), "learner", LEARNER_FIELD_NAMES))
    sweep_data = _section(data.get("sweep"), "sweep", SWEEP_AXES)
    sweep = []
    for axis, values in sweep_data.items():
        if not isinstance(values, (list, tuple)):
            values = [values]
        sweep.append((axis, tuple(values)))
    policy = data.get("policy", ["DRLO"])
    policies = (policy,) if isinstance(policy, str) else tuple(policy)
    if not all(isinstance(p, str) for p in policies):
        raise ConfigError("policy", f"expected policy names, got {policy!r}")
    kwargs = {k: data[k] for k in ("runs_per_point", "seed", "output_dir", "aggregate_tail",
                                   "workers", "write_series", "save_policies", "load_policies") if k in data}
    for key in ("output_dir", "load_policies"):
        if kwargs.get(key) is not None:
            kwargs[key] = str(kwargs[key])
    return ExperimentSpec(sim=sim, learner=learner, policies=policies, sweep=tuple(sweep), **kwargs)


class _Loader(yaml.SafeLoader):
    """Safe loader where only true/false are booleans, so the policy ``NO`` stays a string."""


_Loader.yaml_implicit_resolvers = {
    ch: [(tag, rx) for tag, rx in resolvers if tag not in ("tag:yaml.org,2002:bool", "tag:yaml.org,2002:float")]
    for ch, resolvers in yaml.SafeLoader.yaml_implicit_resolvers.items()
}
_Loader.add_implicit_resolver("tag:yaml.org,2002:bool", re.compile(r"^(?:true|True|TRUE|false|False|FALSE)$"),
                              list("tTfF"))
# floats as YAML 1.2 writes them: unlike PyYAML's default, 1e6 and 1.0e6 are numbers too
_Loader.add_implicit_resolver("tag:yaml.org,2002:float", re.compile(r"""^(?:
    [-+]?[0-9][0-9_]*\.[0-9_]*(?:[eE][-+]?[0-9]+)?
    |[-+]?[0-9][0-9_]*[eE][-+]?[0-9]+
    |[-+]?\.[0-9_]+(?:[eE][-+]?[0-9]+)?
    |[-+]?\.(?:inf|Inf|INF)
    |\.(?:nan|NaN|NAN))$""", re.X), list("-+0123456789."))


def load_config(path) -> ExperimentSpec:
    """Parse a YAML experiment config.

    Raises :class:`ConfigError` naming the offending field, or the line
    number for malformed YAML.
    """
    text = Path(path).read_text()
    try:
        data = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else "<unknown line>"
        problem = getattr(err, "problem", None) or str(err)
        raise ConfigError(where, f"cannot parse config: {problem}") from None
    return spec_from_dict(data)


def dump_config(spec: ExperimentSpec) -> str:
    """Resolved config as YAML, suitable for echoing and for reloading."""
    return yaml.safe_dump(spec.to_dict(), sort_keys=False)
