import csv
import json
import math

import numpy as np
import pytest

from hyperflow import cli
from hyperflow.problem import PositivityError
from hyperflow.scenario import (SchemaError, load_scenario, load_suite, parse_scenario, read_table,
                                run_scenario, sweep, with_param)
from hyperflow.trace import COLUMNS, DiagnosticsTrace

SUMMARY_KEYS = {"name", "kind", "expected_verdict", "verdict", "reason", "regime",
                "final_residual_linf", "final_residual_l2", "c_star", "final_t", "steps",
                "wall_time", "rho_min", "rho_max", "checks", "failures", "exit_code", "metrics"}


def flow_scenario(name="tiny", **problem):
    base = {"n": 1, "N": 32, "alpha": 2.0, "fdata": {"family": "constant", "c": 2.0},
            "initial": {"shape": "round", "rho0": 0.3}}
    base.update(problem)
    return {"schema_version": 1, "name": name, "kind": "flow", "problem": base,
            "expect": {"verdict": "converged", "rho_target": math.acosh(2), "rho_tol": 1e-6},
            "asserts": [{"check": "q_monotone"}, {"check": "residual_target"}]}


def write(path, data):
    path.write_text(json.dumps(data, indent=2))
    return path


def test_constant_scenario_loads_in_theorem_regime():
    s = parse_scenario(flow_scenario())
    assert s.problem.regime == "critical-bounded" and s.expected_verdict == "converged"


def test_positivity_violation_on_load():
    data = flow_scenario(fdata={"family": "even_cosine", "c0": 1.0, "coeffs": [-2.0]})
    with pytest.raises(PositivityError):
        parse_scenario(data)


def test_normalized_alpha_out_of_range_is_schema_error():
    data = flow_scenario(alpha=4.0, mode="normalized")
    with pytest.raises(SchemaError) as err:
        parse_scenario(data)
    assert err.value.path == "$.problem.alpha"
    data["problem"]["exploratory"] = True
    assert parse_scenario(data).problem.regime == "exploratory"


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d.pop("kind"), "$"),
    (lambda d: d["problem"].update(n=3), "$.problem.n"),
    (lambda d: d["problem"].update(N=8), "$.problem.N"),
    (lambda d: d["problem"]["fdata"].update(family="zigzag"), "$.problem.fdata.family"),
    (lambda d: d["problem"].update(controls={"cfl": 2.0}), "$.problem.controls"),
    (lambda d: d.update(schema_version=7), "$.schema_version"),
])
def test_schema_errors_carry_paths(mutate, path):
    data = flow_scenario()
    mutate(data)
    with pytest.raises(SchemaError) as err:
        parse_scenario(data)
    assert err.value.path == path


def test_shipped_scenarios_all_load(scenarios_dir):
    entries = load_suite(scenarios_dir / "suite.json")
    names = {s.name for s, _ in entries}
    assert {"round_equilibrium_low", "shrinking_sphere", "ellipsoid_j"} <= names
    for path in scenarios_dir.glob("*.json"):
        if path.name != "suite.json":
            load_scenario(path)


def test_run_scenario_outputs(tmp_path):
    s = parse_scenario(flow_scenario())
    oc = run_scenario(s, tmp_path, figures=True)
    assert oc.exit_code == 0, oc.summary["failures"]
    out = tmp_path / "tiny"
    for name in ("trace.csv", "profile_final.csv", "summary.json", "trace.png", "profile_final.png"):
        assert (out / name).exists()
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary) == SUMMARY_KEYS and summary["verdict"] == "converged"
    names, table = read_table(out / "profile_final.csv")
    assert names[:2] == ["theta", "rho"] and table.shape[0] == 32
    assert np.max(np.abs(table[:, 1] - math.acosh(2))) < 1e-6


def test_trace_csv_round_trip(tmp_path):
    oc = run_scenario(parse_scenario(flow_scenario()), tmp_path, figures=False)
    path = tmp_path / "tiny" / "trace.csv"
    back = DiagnosticsTrace.from_csv(path)
    assert np.array_equal(back.as_array(), oc.result.trace.as_array(), equal_nan=True)
    with open(path) as fh:
        assert tuple(next(csv.reader(fh))) == COLUMNS


def test_trace_rejects_nonincreasing_time():
    tr = DiagnosticsTrace()
    row = {c: 0.0 for c in COLUMNS}
    tr.append(**row)
    with pytest.raises(ValueError):
        tr.append(**row)
    with pytest.raises(KeyError):
        tr.append(t=1.0)


def test_runs_are_byte_identical(tmp_path):
    s = parse_scenario(flow_scenario())
    run_scenario(s, tmp_path / "a", figures=False)
    run_scenario(s, tmp_path / "b", figures=False)
    for name in ("trace.csv", "profile_final.csv"):
        assert (tmp_path / "a" / "tiny" / name).read_bytes() == (tmp_path / "b" / "tiny" / name).read_bytes()


def test_failed_expectation_gives_exit_one(tmp_path):
    data = flow_scenario()
    data["expect"]["verdict"] = "shrinking"
    oc = run_scenario(parse_scenario(data), tmp_path, figures=False)
    assert oc.exit_code == 1 and "expected shrinking" in oc.summary["failures"][0]


def test_with_param_revalidates():
    s = parse_scenario(flow_scenario())
    assert with_param(s, "N", 64).problem.grid.N == 64
    assert with_param(s, "cfl", 0.1).problem.controls.cfl == 0.1
    with pytest.raises(SchemaError):
        with_param(s, "N", 4)
    with pytest.raises(SchemaError):
        with_param(s, "colour", 1.0)


def test_sweep_over_cfl(tmp_path):
    s = parse_scenario(flow_scenario())
    report = sweep(s, "cfl", [0.1, 0.2], tmp_path, figures=True)
    assert [r["exit_code"] for r in report["rows"]] == [0, 0]
    assert report["stats"]["max_pairwise_diff"] < 1e-9
    base = tmp_path / "tiny"
    assert (base / "sweep_cfl.csv").exists() and (base / "sweep_cfl.png").exists()
    assert json.loads((base / "sweep_cfl.json").read_text())["param"] == "cfl"


def test_cli_run_exit_zero(tmp_path, capsys):
    path = write(tmp_path / "tiny.json", flow_scenario())
    code = cli.main(["run", str(path), "--out", str(tmp_path / "out"), "--quiet", "--no-figures"])
    assert code == 0
    assert "tiny: converged" in capsys.readouterr().out


def test_cli_shrinking_scenario(scenarios_dir, tmp_path):
    code = cli.main(["run", str(scenarios_dir / "shrinking_sphere.json"), "--out", str(tmp_path),
                     "--quiet", "--no-figures"])
    assert code == 0
    summary = json.loads((tmp_path / "shrinking_sphere" / "summary.json").read_text())
    assert summary["verdict"] == "shrinking"
    rho_max = DiagnosticsTrace.from_csv(tmp_path / "shrinking_sphere" / "trace.csv").column("rho_max")
    assert np.all(np.diff(rho_max) < 0)


def test_cli_input_errors(tmp_path, capsys):
    bad = write(tmp_path / "bad.json", flow_scenario(alpha=4.0, mode="normalized"))
    assert cli.main(["run", str(bad), "--out", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "schema-error" and err["path"] == "$.problem.alpha"

    neg = write(tmp_path / "neg.json", flow_scenario(fdata={"family": "even_cosine", "c0": 1.0,
                                                            "coeffs": [-2.0]}))
    assert cli.main(["run", str(neg), "--out", str(tmp_path)]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "positivity-violation"

    assert cli.main(["run", str(tmp_path / "missing.json")]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "file-not-found"

    (tmp_path / "broken.json").write_text("{not json")
    assert cli.main(["run", str(tmp_path / "broken.json")]) == 2


def test_cli_sweep_and_verify(tmp_path, capsys):
    write(tmp_path / "tiny.json", flow_scenario())
    code = cli.main(["sweep", str(tmp_path / "tiny.json"), "--param", "cfl", "--values", "0.1,0.2",
                     "--out", str(tmp_path / "sw"), "--quiet", "--no-figures"])
    assert code == 0 and "max_pairwise_diff" in capsys.readouterr().out
    write(tmp_path / "suite.json", {"schema_version": 1, "entries": [
        {"scenario": "tiny.json"},
        {"scenario": "tiny.json", "sweep": {"param": "cfl", "values": [0.1, 0.2],
                                            "expect": {"max_pairwise_diff": 1e-9}}}]})
    code = cli.main(["verify", str(tmp_path / "suite.json"), "--out", str(tmp_path / "v"),
                     "--quiet", "--no-figures"])
    out = capsys.readouterr().out
    assert code == 0 and out.count("\nPASS tiny") + out.startswith("PASS tiny") == 2 and "2/2 entries passed" in out
    assert (tmp_path / "v" / "verify_report.txt").exists()


def test_cli_verify_reports_failure(tmp_path, capsys):
    data = flow_scenario()
    data["expect"]["verdict"] = "expanding"
    write(tmp_path / "wrong.json", data)
    write(tmp_path / "suite.json", {"schema_version": 1, "entries": [{"scenario": "wrong.json"}]})
    assert cli.main(["verify", str(tmp_path / "suite.json"), "--out", str(tmp_path / "v"),
                     "--quiet", "--no-figures"]) == 1
    assert "FAIL tiny" in capsys.readouterr().out


def test_cli_rejects_bad_values():
    with pytest.raises(SystemExit):
        cli.main(["sweep", "x.json", "--param", "cfl", "--values", "a,b"])
