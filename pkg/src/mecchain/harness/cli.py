"""Command line entry point: ``mecchain run | summarize | selftest``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..config import ConfigError
from .experiment import dump_config, load_config
from .runner import run_experiment
from .selftest import run_selftest
from .summary import SummaryError, format_table, summarize, write_report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mecchain", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment described by a YAML config")
    run.add_argument("config", type=Path)
    run.add_argument("--seed", type=int, help="override the base seed")
    run.add_argument("--out", type=Path, help="override the output directory")
    run.add_argument("--policy", action="append",
                     help="override the policy (repeat for several): NO, EO, RANDOM, RLO, DRLO")
    run.add_argument("--workers", type=int, help="worker processes (outputs do not depend on this)")
    run.add_argument("--save-policies", action="store_true",
                     help="write each learner's final Q-table or network under <out>/policies/")
    run.add_argument("--load-policies", type=Path, metavar="DIR",
                     help="warm-start learners from a directory written by --save-policies")

    summ = sub.add_parser("summarize", help="compare policies across finished experiments")
    summ.add_argument("inputs", nargs="+", type=Path, help="experiment directories or aggregate CSVs")
    summ.add_argument("--out", type=Path, help="write summary.csv and summary.json here")

    sub.add_parser("selftest", help="run the quick oracle checks")
    return parser


def _run(args) -> int:
    spec = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["output_dir"] = str(args.out)
    if args.policy:
        changes["policies"] = tuple(args.policy)
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.save_policies:
        changes["save_policies"] = True
    if args.load_policies is not None:
        changes["load_policies"] = str(args.load_policies)
    spec = spec.replace(**changes) if changes else spec
    print("# resolved config")
    print(dump_config(spec), end="")
    out = run_experiment(spec)
    print(f"# wrote {out}")
    return 0


def _summarize(args) -> int:
    inputs = args.inputs[0] if len(args.inputs) == 1 and args.inputs[0].is_dir() else args.inputs
    report = summarize(inputs)
    print(format_table(report))
    if args.out is not None:
        for path in write_report(report, args.out):
            print(f"# wrote {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "summarize":
            return _summarize(args)
        return 0 if run_selftest() else 1
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except SummaryError as err:
        print(f"summarize error: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        # e.g. a checkpoint that does not fit the configured learner
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
