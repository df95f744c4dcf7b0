import csv
import json

import pytest

from mecchain.config import ConfigError
from mecchain.harness import (ExperimentSpec, SummaryError, derive_seed, dump_config, load_config,
                              read_series, run_experiment, spec_from_dict, summarize, write_report)
from mecchain.harness.cli import main


def write(tmp_path, text, name="exp.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def tiny(**kw):
    base = {"policy": ["NO", "EO"], "runs_per_point": 2, "seed": 7,
            "sim": {"num_miners": 2, "total_slots": 10}}
    base.update(kw)
    return spec_from_dict(base)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- configs -------------------------------------------------------------------------

def test_empty_config_takes_defaults(tmp_path):
    spec = load_config(write(tmp_path, ""))
    assert spec.sim.beta == 0.5 and spec.sim.total_slots == 8000
    assert spec.learner.gamma == 0.85
    assert spec.policies == ("DRLO",) and spec.runs_per_point == 50


def test_policy_no_is_read_as_a_name(tmp_path):
    assert load_config(write(tmp_path, "policy: [NO, EO]\n")).policies == ("NO", "EO")
    assert load_config(write(tmp_path, "policy: NO\nwrite_series: false\n")).write_series is False


@pytest.mark.parametrize("text, field", [
    ("sim: {fo: 1}\n", "sim.fo"),
    ("fo: 1\n", "fo"),
    ("sim: {beta: 1.5}\n", "sim.beta"),
    ("learner: {gamma: 2}\n", "learner.gamma"),
    ("policy: [XYZ]\n", "policy"),
    ("sweep: {colour: [1]}\n", "sweep.colour"),
    ("sweep: {beta: [0.5, 2.0]}\n", "sweep.beta"),
    ("runs_per_point: 0\n", "runs_per_point"),
])
def test_bad_configs_name_the_field(tmp_path, text, field):
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, text))
    assert err.value.field == field


def test_malformed_yaml_reports_the_line(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, "seed: 1\nsim: {beta: [\n"))
    assert err.value.field.startswith("line ")


def test_dumped_config_reloads(tmp_path):
    spec = tiny(sweep={"beta": [0.5, 0.8]})
    again = load_config(write(tmp_path, dump_config(spec)))
    assert again == spec


def test_sweep_points_are_a_cartesian_product():
    spec = tiny(sweep={"beta": [0.2, 0.8], "task_size_kb": [10, 40, 70]})
    pts = spec.points()
    assert len(pts) == 6 and pts[1] == {"beta": 0.2, "task_size_kb": 40}
    assert spec.sim_for(pts[1]).task_size_range_bits == (20 * 8000.0, 60 * 8000.0)


def test_seeds_are_distinct_and_stable():
    seeds = {derive_seed(0, i, j) for i in range(5) for j in range(50)}
    assert len(seeds) == 250
    assert derive_seed(3, 1, 2) == derive_seed(3, 1, 2) != derive_seed(4, 1, 2)


# -- running -----------------------------------------------------------------------------

def test_run_writes_series_aggregate_and_manifest(tmp_path):
    out = run_experiment(tiny(policy="NO", runs_per_point=1), tmp_path / "r")
    series = read_series(out / "series" / "NO_p000_r000.csv")
    assert len(series["slot"]) == 10
    rows = read_rows(out / "aggregate.csv")
    assert len(rows) == 1 and rows[0]["runs"] == "1"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["schema_version"] == "1"
    assert manifest["files"] == ["series/NO_p000_r000.csv", "aggregate.csv"]
    assert b"\r\n" in (out / "aggregate.csv").read_bytes()


def test_outputs_are_byte_identical_across_repeats_and_workers(tmp_path):
    spec = tiny(policy=["RANDOM", "RLO"], sweep={"beta": [0.5, 0.8]})
    dirs = [run_experiment(spec, tmp_path / "a"), run_experiment(spec, tmp_path / "b"),
            run_experiment(spec, tmp_path / "c", workers=2)]
    names = sorted(p.relative_to(dirs[0]) for p in dirs[0].rglob("*") if p.is_file())
    assert len(names) == 2 * 2 * 2 + 2
    for d in dirs[1:]:
        assert sorted(p.relative_to(d) for p in d.rglob("*") if p.is_file()) == names
        for name in names:
            assert (d / name).read_bytes() == (dirs[0] / name).read_bytes()


def test_runs_with_different_seeds_differ(tmp_path):
    out = run_experiment(tiny(policy="RANDOM"), tmp_path / "r")
    a = read_series(out / "series" / "RANDOM_p000_r000.csv")
    b = read_series(out / "series" / "RANDOM_p000_r001.csv")
    assert not (a["reward"] == b["reward"]).all()


def test_never_offloading_costs_more_energy(tmp_path):
    spec = tiny(runs_per_point=3, sim={"num_miners": 1, "total_slots": 300})
    rows = {r["policy"]: r for r in read_rows(run_experiment(spec, tmp_path / "r") / "aggregate.csv")}
    assert float(rows["NO"]["energy_j_mean"]) > float(rows["EO"]["energy_j_mean"])


def test_aggregate_tail_only_sees_the_end(tmp_path):
    spec = tiny(policy="RANDOM", runs_per_point=1, aggregate_tail=3)
    out = run_experiment(spec, tmp_path / "r")
    series = read_series(out / "series" / "RANDOM_p000_r000.csv")
    row = read_rows(out / "aggregate.csv")[0]
    assert float(row["cost_mean"]) == pytest.approx(series["cost"][-3:].mean(), rel=1e-12)


# -- summaries ------------------------------------------------------------------------

def test_summarize_merges_policies(tmp_path):
    a = run_experiment(tiny(policy="NO", write_series=False), tmp_path / "a")
    b = run_experiment(tiny(policy="EO", write_series=False), tmp_path / "b")
    report = summarize([a, b])
    assert [r["policy"] for r in report["rows"]] == ["EO", "NO"]
    csv_path, json_path = write_report(report, tmp_path / "s")
    assert len(read_rows(csv_path)) == 2
    assert json.loads(json_path.read_text())["rows"] == report["rows"]
    assert len(summarize(tmp_path)["rows"]) == 2


def test_summarize_single_input(tmp_path):
    a = run_experiment(tiny(write_series=False), tmp_path / "a")
    assert len(summarize(a)["rows"]) == 2


def test_summarize_rejects_mismatched_axes_and_duplicates(tmp_path):
    a = run_experiment(tiny(policy="NO", write_series=False), tmp_path / "a")
    b = run_experiment(tiny(policy="EO", write_series=False, sweep={"beta": [0.5]}), tmp_path / "b")
    with pytest.raises(SummaryError):
        summarize([a, b])
    with pytest.raises(SummaryError):
        summarize([a, a])
    with pytest.raises(SummaryError):
        summarize(tmp_path / "missing")


# -- command line -----------------------------------------------------------------------

def test_cli_run_and_summarize(tmp_path, capsys):
    cfg = write(tmp_path, "policy: [NO]\nruns_per_point: 1\nsim: {total_slots: 5}\n")
    assert main(["run", str(cfg), "--seed", "3", "--out", str(tmp_path / "r"), "--policy", "EO",
                 "--policy", "RANDOM"]) == 0
    printed = capsys.readouterr().out
    assert "seed: 3" in printed and "- EO" in printed
    rows = read_rows(tmp_path / "r" / "aggregate.csv")
    assert [r["policy"] for r in rows] == ["EO", "RANDOM"]
    assert main(["summarize", str(tmp_path / "r"), "--out", str(tmp_path / "s")]) == 0
    assert (tmp_path / "s" / "summary.csv").exists()


def test_cli_reports_errors_with_exit_codes(tmp_path, capsys):
    assert main(["run", str(write(tmp_path, "sim: {fo: 1}\n"))]) == 2
    assert "sim.fo" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "absent.yaml")]) == 1
    assert main(["summarize", str(tmp_path / "nothing")]) == 2


def test_policies_are_saved_and_reloaded(tmp_path, capsys):
    cfg = write(tmp_path, "policy: [NO, RLO, DRLO]\nruns_per_point: 1\nsim: {num_miners: 2, total_slots: 40}\n"
                          "learner: {batch_size: 8, hidden_layers: [8]}\n")
    assert main(["run", str(cfg), "--out", str(tmp_path / "a"), "--save-policies"]) == 0
    saved = sorted(p.name for p in (tmp_path / "a" / "policies").iterdir())
    assert saved == ["DRLO_p000_r000_m00.bin", "DRLO_p000_r000_m01.bin",
                     "RLO_p000_r000_m00.json", "RLO_p000_r000_m01.json"]
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert "policies/RLO_p000_r000_m00.json" in manifest["files"]
    assert main(["run", str(cfg), "--out", str(tmp_path / "b"), "--load-policies", str(tmp_path / "a")]) == 0
    cold = read_rows(tmp_path / "a" / "aggregate.csv")
    warm = read_rows(tmp_path / "b" / "aggregate.csv")
    assert cold[0] == warm[0]  # the NO baseline is unaffected
    assert cold[1]["reward_mean"] != warm[1]["reward_mean"]
    assert main(["run", str(cfg), "--out", str(tmp_path / "c"), "--load-policies", str(tmp_path / "none")]) == 1
    capsys.readouterr()


def test_exponent_floats_are_numbers(tmp_path):
    spec = load_config(write(tmp_path, "sim: {uplink_rate_bits_per_s: 2e6, mec_energy_coeff: 1.0e-31}\n"))
    assert spec.sim.uplink_rate_bits_per_s == 2e6 and spec.sim.mec_energy_coeff == 1e-31


def test_annotated_default_config_matches_the_library_defaults():
    from pathlib import Path

    from mecchain.config import LearnerConfig, SimConfig
    root = Path(__file__).resolve().parents[1] / "configs"
    spec = load_config(root / "default.yaml")
    assert spec.sim == SimConfig() and spec.learner == LearnerConfig()
    for name in ("multiuser.yaml", "privacy_sweep.yaml", "smoke.yaml"):
        load_config(root / name)
