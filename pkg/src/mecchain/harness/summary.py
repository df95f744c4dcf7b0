"""Cross-policy comparison of finished experiments."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .runner import _csv_text


class SummaryError(ValueError):
    pass


def _resolve(path: Path) -> tuple[Path, dict | None]:
    """Aggregate CSV for ``path`` (a run directory or the CSV itself) and its manifest."""
    csv_path = path / "aggregate.csv" if path.is_dir() else path
    if not csv_path.exists():
        raise SummaryError(f"{path}: no aggregate.csv found")
    manifest_path = csv_path.parent / "manifest.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else None
    return csv_path, manifest


def _read(csv_path: Path) -> tuple[list[str], list[dict]]:
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        return list(reader.fieldnames or []), list(reader)


def discover(root) -> list[Path]:
    """Every experiment directory at or below ``root``."""
    root = Path(root)
    if root.is_file():
        return [root]
    found = sorted(p.parent for p in root.rglob("aggregate.csv"))
    if not found:
        raise SummaryError(f"{root}: no aggregate.csv found")
    return found


def summarize(inputs) -> dict:
    """Merge aggregate tables into one report keyed by sweep point.

    Inputs must share the same sweep axes (names and values); a
    ``(policy, point)`` pair may appear only once across inputs.
    """
    if isinstance(inputs, (str, Path)):
        inputs = discover(inputs)
    inputs = [Path(p) for p in inputs]
    if not inputs:
        raise SummaryError("need at least one aggregate CSV")
    header = None
    axes = None
    rows = []
    seen = set()
    for path in inputs:
        csv_path, manifest = _resolve(path)
        cols, body = _read(csv_path)
        these_axes = manifest["sweep_axes"] if manifest else None
        if header is None:
            header, axes = cols, these_axes
        elif cols != header or these_axes != axes:
            raise SummaryError(f"{csv_path}: sweep axes {these_axes} do not match {axes}")
        for row in body:
            key = (row["policy"], row["point"])
            if key in seen:
                raise SummaryError(f"{csv_path}: duplicate result for policy {key[0]} at point {key[1]}")
            seen.add(key)
            rows.append(row)
    rows.sort(key=lambda r: (int(r["point"]), r["policy"]))
    return {"columns": header, "sweep_axes": axes, "rows": rows}


def write_report(report: dict, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "summary.csv"
    rows = ([r[c] for c in report["columns"]] for r in report["rows"])
    csv_path.write_bytes(_csv_text(report["columns"], rows).encode())
    json_path = out / "summary.json"
    json_path.write_bytes((json.dumps(report, indent=2) + "\n").encode())
    return csv_path, json_path


def format_table(report: dict, columns=("cost_mean", "energy_j_mean", "latency_s_mean",
                                        "privacy_mean", "reward_mean", "convergence_slot_mean")) -> str:
    """Plain-text table for terminals."""
    axes = list(report["sweep_axes"] or {})
    head = ["point", *axes, "policy", *columns]
    lines = ["  ".join(f"{h:>14s}" for h in head)]
    for r in report["rows"]:
        cells = [r["point"], *(r[a] for a in axes), r["policy"]]
        cells += [f"{float(r[c]):.4g}" for c in columns]
        lines.append("  ".join(f"{c:>14s}" for c in map(str, cells)))
    return "\n".join(lines)
