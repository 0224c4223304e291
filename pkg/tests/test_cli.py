import csv
import io
import json

import numpy as np
import pytest

from nonresp.cli import main
from nonresp.montecarlo import SimulationReport
from nonresp.population import PopulationParams, synthesize_population


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table_json(capsys, name):
    code, out, _ = run(capsys, "table", "--preset", name, "--format", "json")
    assert code == 0
    return {r["W2"]: (r["ratio"], r["regression"], r["optimum"]) for r in json.loads(out)["rows"]}


def test_table1_row(capsys):
    assert table_json(capsys, "table1")[0.1] == pytest.approx((126.74, 432.88, 788.38), abs=0.01)


def test_table2_row(capsys):
    assert table_json(capsys, "table2")[0.3] == pytest.approx((124.73, 151.63, 152.68), abs=0.01)


def test_table3_row_ratio_and_regression(capsys):
    # the optimum cell is checked in the acceptance suite against the reference
    row = table_json(capsys, "table3")[0.2]
    assert row[:2] == pytest.approx((155.61, 207.27), abs=0.01)
    assert row[1] < row[2]


def test_table_text_has_notes_and_five_decimals(capsys):
    code, out, _ = run(capsys, "table", "--preset", "table3", "--compare")
    assert code == 0
    assert "190.94488" in out and "W2=0.4" in out
    assert "217.84716" in out


def test_table_csv(capsys):
    code, out, _ = run(capsys, "table", "--preset", "table1", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["W2", "ratio", "regression", "class_opt"]
    assert len(rows) == 6


def test_table_from_spec_file(tmp_path, capsys):
    spec = {
        "params": {"N": 200, "Ybar": 500, "Xbar": 25, "C_Y": 15, "C_X": 2, "rho": 0.9,
                   "S2_Y2_ratio": 0.8},
        "design": {"n": 50, "k": 1.5},
        "class_shape": {"eta": 1, "lambda": 0},
        "W2_values": [0.5],
    }
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    code, out, _ = run(capsys, "table", "--spec", str(path), "--format", "json")
    row = json.loads(out)["rows"][0]
    assert (row["ratio"], row["regression"], row["optimum"]) == pytest.approx(
        (121.28, 277.37, 704.87), abs=0.01)


@pytest.mark.parametrize("bad, field", [
    ({"extra": 1}, "extra"),
    ({"params": {"N": 10, "Ybar": 1, "Xbar": 1, "rho": 0, "S2_Y": 1, "C_Y": 1,
                 "S2_X": 1, "S2_Y2": 0}}, "S2_Y"),
    ({"design": {"n": 5, "m": 3}}, "m"),
])
def test_spec_validation_names_field(tmp_path, capsys, bad, field):
    spec = {"params": {"N": 10, "Ybar": 1, "Xbar": 1, "rho": 0, "S2_Y": 1, "S2_X": 1, "S2_Y2": 0},
            "design": {"n": 5}}
    spec.update(bad)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    code, _, err = run(capsys, "table", "--spec", str(path))
    assert code == 2
    assert field in err


def test_params_from_csv(tmp_path, capsys):
    path = tmp_path / "pop.csv"
    path.write_text("y,x,group\n1,1,R\n2,2,R\n3,3,NR\n4,4,NR\n")
    code, out, _ = run(capsys, "params", "--population", str(path), "--format", "json")
    p = json.loads(out)
    assert p["W2"] == 0.5 and p["rho"] == pytest.approx(1.0) and p["S2_Y2"] == pytest.approx(0.5)


def test_params_from_preset(capsys):
    code, out, _ = run(capsys, "params", "--preset", "table2", "--W2", "0.2", "--format", "json")
    p = json.loads(out)
    assert p["N"] == 70 and p["W2"] == 0.2 and p["S2_Y2"] == pytest.approx(244.11 ** 2)


def test_simulate_rejects_small_R(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--preset", "table1", "--R", "10"])
    assert exc.value.code == 2
    assert "R" in capsys.readouterr().err


def test_simulate_json_identical_across_threads(tmp_path, capsys):
    outs = []
    for threads in ("1", "8"):
        path = tmp_path / f"out{threads}.json"
        main(["simulate", "--preset", "table2", "--W2", "0.2", "--R", "300", "--seed", "4",
              "--threads", threads, "--format", "json", "--out", str(path)])
        outs.append(path.read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]
    reports = json.loads(outs[0])["reports"]
    rep = dict(reports[0])
    rep.pop("population")
    assert SimulationReport.from_dict(rep).to_dict() == rep


def test_seed_from_environment(tmp_path, capsys, monkeypatch):
    args = ["simulate", "--preset", "table2", "--W2", "0.2", "--R", "100", "--format", "json"]
    monkeypatch.setenv("NONRESP_SEED", "4")
    main(args)
    env_out = capsys.readouterr().out
    main(args + ["--seed", "4"])
    flag_out = capsys.readouterr().out
    main(args + ["--seed", "5"])
    other = capsys.readouterr().out
    assert env_out == flag_out != other
    assert json.loads(env_out)["reports"][0]["seed"] == 4


def test_simulate_exit_status_reflects_flags(tmp_path, capsys):
    t = PopulationParams(N=2000, Ybar=500, Xbar=25, S2_Y=300 ** 2, S2_X=10 ** 2, rho=0.8,
                         W2=0.2, S2_Y2=0.8 * 300 ** 2)
    pop = synthesize_population(t, 3)
    path = tmp_path / "pop.csv"
    with open(path, "w") as fh:
        pop.to_csv(fh)
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"params": {"N": 2000, "Ybar": 500, "Xbar": 25, "S_Y": 300,
                                           "S_X": 10, "rho": 0.8, "S2_Y2_ratio": 0.8},
                                "design": {"n": 200, "k": 2}}))
    code, out, _ = run(capsys, "simulate", "--spec", str(spec), "--population", str(path),
                       "--R", "2000", "--seed", "1")
    assert code == 0
    assert "hh_mean" in out and "class" in out


def test_estimate_census_gives_population_mean(tmp_path, capsys):
    path = tmp_path / "pop.csv"
    path.write_text("y,x,group\n1,2,R\n2,3,NR\n4,1,R\n8,5,NR\n10,4,R\n")
    code, out, _ = run(capsys, "estimate", "--population", str(path), "--n", "5", "--k", "1",
                       "--estimator", "hh_mean", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["estimates"]["hh_mean"] == pytest.approx(5.0)
    assert payload["sample"] == {"n": 5, "n1": 3, "n2": 2, "h2": 2}


def test_estimate_two_phase_on_single_phase_design(tmp_path, capsys):
    path = tmp_path / "pop.csv"
    path.write_text("y,x\n1,2\n2,3\n4,1\n8,5\n")
    with pytest.raises(SystemExit) as exc:
        main(["estimate", "--population", str(path), "--n", "3", "--estimator", "ratio_2p"])
    assert exc.value.code == 2
    assert "two-phase" in capsys.readouterr().err


def test_estimate_ratio_needs_xbar(tmp_path, capsys):
    path = tmp_path / "pop.csv"
    path.write_text("y,x\n1,2\n2,3\n4,1\n8,5\n")
    with pytest.raises(SystemExit):
        main(["estimate", "--population", str(path), "--n", "3", "--estimator", "ratio"])
    assert "population mean of auxiliary variable required" in capsys.readouterr().err


def test_estimate_regression_2p_on_synthetic_population(tmp_path, capsys):
    t = PopulationParams(N=70, Ybar=981.29, Xbar=1755.53, S2_Y=613.66 ** 2,
                         S2_X=1406.13 ** 2, rho=0.778, W2=0.2, S2_Y2=244.11 ** 2)
    path = tmp_path / "pop.csv"
    with open(path, "w") as fh:
        synthesize_population(t, 1).to_csv(fh)
    code, out, _ = run(capsys, "estimate", "--population", str(path), "--preset", "table2",
                       "--estimator", "hh_mean,regression_2p,class_2p", "--seed", "3",
                       "--format", "json")
    assert code == 0
    est = json.loads(out)["estimates"]
    assert np.isfinite(est["regression_2p"])
    # within 4 standard deviations of the two-phase regression estimator (MSE ~ 6.4e3)
    assert abs(est["regression_2p"] - 981.29) < 4 * 6383.4 ** 0.5


def test_estimate_from_sample_file(tmp_path, capsys):
    path = tmp_path / "sample.csv"
    path.write_text("y,x,role\n1,3,R\n2,4,R\n3,5,R\n4,4,NRS\n6,4,NRS\n,5,P1\n,6.5,P1\n")
    code, out, _ = run(capsys, "estimate", "--sample", str(path),
                       "--estimator", "hh_mean,ratio_2p,class_2p", "--alpha1", "0.5",
                       "--alpha2", "1", "--format", "json")
    assert code == 0
    est = json.loads(out)["estimates"]
    assert est["hh_mean"] == pytest.approx(3.2)
    assert est["ratio_2p"] == pytest.approx(3.6)
    assert est["class_2p"] == pytest.approx(2.3625)


def test_unknown_preset(capsys):
    with pytest.raises(SystemExit):
        main(["table", "--preset", "table9"])


def test_help_for_every_command(capsys):
    for cmd in ("params", "table", "simulate", "estimate"):
        with pytest.raises(SystemExit) as exc:
            main([cmd, "--help"])
        assert exc.value.code == 0
        assert "--format" in capsys.readouterr().out
