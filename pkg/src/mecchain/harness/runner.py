"""Seeded multi-run experiments and their CSV/JSON outputs.

Output layout under the experiment's output directory::

    aggregate.csv                      one row per (policy, sweep point)
    series/<policy>_p<i>_r<j>.csv      per-slot series of one run
    policies/<policy>_p<i>_r<j>_m<n>.* learned policy of miner n (only with save_policies)
    manifest.json                      resolved config, seeds, file list, schema

Floats are written with ``repr`` so files are byte-identical across runs,
regardless of how many worker processes produced them.
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..agents import checkpoint, make_agents, restore, run_episode
from ..env import MecBlockchainEnv
from ..metrics import SERIES, convergence_slot
from .experiment import ExperimentSpec

SCHEMA_VERSION = "1"
SERIES_COLUMNS = ("slot",) + SERIES
RUN_STATS = SERIES + ("convergence_slot",)


def aggregate_columns(axis_names) -> tuple[str, ...]:
    cols = ["policy", "point", *axis_names, "runs"]
    for name in RUN_STATS:
        cols += [f"{name}_mean", f"{name}_std"]
    return tuple(cols)


@dataclass(frozen=True)
class RunResult:
    policy: str
    point: int
    run: int
    seed: int
    series: np.ndarray  # (T, len(SERIES))
    stats: dict
    policies: tuple = ()  # (relative file name, payload bytes)


def policy_name(policy: str, point: int, run: int, miner: int, suffix: str) -> str:
    return f"policies/{policy}_p{point:03d}_r{run:03d}_m{miner:02d}{suffix}"


def _policy_dir(path) -> Path:
    path = Path(path)
    return path / "policies" if (path / "policies").is_dir() else path


def execute_run(spec: ExperimentSpec, policy: str, point: int, run: int) -> RunResult:
    """One episode: environment and agents seeded from the derived run seed."""
    sim = spec.sim_for(spec.points()[point]).replace(rng_seed=spec.run_seed(point, run))
    env = MecBlockchainEnv(sim)
    env.reset(sim.rng_seed)
    agents = make_agents(policy, sim, spec.learner, sim.rng_seed)
    if spec.load_policies is not None:
        source = _policy_dir(spec.load_policies)
        for n, agent in enumerate(agents):
            saved = checkpoint(agent)
            if saved is None:
                continue
            path = source / Path(policy_name(policy, point, run, n, saved[0])).name
            restore(agent, path.read_bytes(), str(path))
    metrics = run_episode(env, agents)
    stats = metrics.aggregates(tail=spec.aggregate_tail)
    stats["convergence_slot"] = float(convergence_slot(metrics.reward))
    series = np.column_stack([getattr(metrics, name) for name in SERIES])
    saved = ()
    if spec.save_policies:
        saved = tuple((policy_name(policy, point, run, n, c[0]), c[1])
                      for n, c in enumerate(map(checkpoint, agents)) if c is not None)
    return RunResult(policy, point, run, sim.rng_seed, series, stats, saved)


def _execute(args):
    return execute_run(*args)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def series_csv(result: RunResult) -> str:
    rows = ([t, *row] for t, row in enumerate(result.series.tolist()))
    return _csv_text(SERIES_COLUMNS, rows)


def series_name(policy: str, point: int, run: int) -> str:
    return f"series/{policy}_p{point:03d}_r{run:03d}.csv"


def aggregate_rows(spec: ExperimentSpec, results: list[RunResult]) -> list[list]:
    """Mean and population standard deviation over runs for each (policy, point)."""
    points = spec.points()
    rows = []
    for policy in spec.policies:
        for i, point in enumerate(points):
            mine = [r for r in results if r.policy == policy and r.point == i]
            row = [policy, i, *point.values(), len(mine)]
            for name in RUN_STATS:
                values = np.array([r.stats[name] for r in mine])
                row += [float(values.mean()), float(values.std())]
            rows.append(row)
    return rows


def run_experiment(spec: ExperimentSpec, out_dir=None, workers: int | None = None) -> Path:
    """Execute every (policy, point, run) and write the outputs; returns the directory.

    Any failing run aborts the experiment before anything is written.
    """
    out = Path(out_dir if out_dir is not None else spec.output_dir)
    workers = spec.workers if workers is None else workers
    jobs = [(spec, policy, i, j) for policy in spec.policies
            for i in range(len(spec.points())) for j in range(spec.runs_per_point)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_execute, jobs, chunksize=1))
    else:
        results = [_execute(job) for job in jobs]

    out.mkdir(parents=True, exist_ok=True)
    files = []
    if spec.write_series:
        (out / "series").mkdir(exist_ok=True)
        for r in results:
            name = series_name(r.policy, r.point, r.run)
            (out / name).write_bytes(series_csv(r).encode())
            files.append(name)
    if any(r.policies for r in results):
        (out / "policies").mkdir(exist_ok=True)
        for r in results:
            for name, payload in r.policies:
                (out / name).write_bytes(payload)
                files.append(name)
    header = aggregate_columns(spec.axis_names)
    (out / "aggregate.csv").write_bytes(_csv_text(header, aggregate_rows(spec, results)).encode())
    files.append("aggregate.csv")

    points = spec.points()
    # where and how parallel a run executes does not change its results, so neither is recorded
    config = {k: v for k, v in spec.to_dict().items() if k not in ("output_dir", "workers")}
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "sweep_axes": {a: list(v) for a, v in spec.sweep},
        "points": points,
        "seeds": [[spec.run_seed(i, j) for j in range(spec.runs_per_point)] for i in range(len(points))],
        "columns": {"series": list(SERIES_COLUMNS), "aggregate": list(header)},
        "files": files,
    }
    (out / "manifest.json").write_bytes((json.dumps(manifest, indent=2) + "\n").encode())
    return out


def read_series(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    return {name: body[:, k] for k, name in enumerate(header)}
