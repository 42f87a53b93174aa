"""
Test script to verify the workers, the orchestrator and the command line front end
"""
import csv
import json
import os

import numpy as np
import pytest

import cli
from artifact_store import ArtifactStore
from orchestrator import RendezvousOrchestrator
from rendezvous import error_space, trajopt
from rendezvous.error_space import Curve
from rendezvous.scenarios import get_preset, load_scenario
from rendezvous.trajopt import StageRecord, overall_status, rendezvous_time
from workers.worker_predict import PredictWorker
from workers.worker_solve import REPORT_FILE, TRAJECTORY_FILE
from workers.worker_validate import SUITES, ValidateWorker

SHORT_SCENARIO = {
    "scenario": "straight",
    "step": 0.2,
    "spec": {"t0": 1.0, "T": 8.0},
    "path": {"segments": [{"length": 500.0}]},
    "solver": {"max_newton": 3, "barrier": {"stages": 2}},
}


@pytest.fixture(autouse=True)
def isolated_output(tmp_path, monkeypatch):
    monkeypatch.setenv("RENDEZVOUS_OUTPUT_DIR", str(tmp_path / "runs"))
    monkeypatch.setenv("RENDEZVOUS_NUM_THREADS", "1")
    return tmp_path / "runs"


@pytest.fixture
def orchestrator(isolated_output):
    return RendezvousOrchestrator(ArtifactStore(str(isolated_output)))


@pytest.fixture
def short_file(tmp_path):
    path = tmp_path / "short.json"
    path.write_text(json.dumps(SHORT_SCENARIO), encoding="utf-8")
    return str(path)


def test_predict_worker_rows():
    result = PredictWorker().process_request({"scenario": get_preset("straight"), "k_values": [0.0, 1.0]})
    assert result["success"]
    slow, steep = result["rows"]
    assert slow["T_r_d"] == pytest.approx(126.5, abs=0.05)
    assert steep["T_r_d"] == pytest.approx(40.31, abs=0.05)
    assert slow["gamma_d_deg"] > steep["gamma_d_deg"]
    assert steep["s_r"] < slow["s_r"] == pytest.approx(2000.0)
    assert "T_r_d" in result["message"]
    for row in (slow, steep):
        bank = np.rad2deg(np.arccos(np.cos(np.deg2rad(row["gamma_d_deg"])) / 1.05))
        assert row["roll_limit_deg"] == pytest.approx(bank)
        assert row["roll_limit_deg"] <= 24.0
    # zero-thrust descent at k=1 only trims at the top of the airspeed range
    assert steep["v_a_trim_min"] == pytest.approx(20.0, abs=0.1)
    assert slow["v_a_trim_min"] < steep["v_a_trim_min"]
    assert "roll_max [deg]" in result["message"]


def test_predict_worker_rejects_bad_k():
    result = PredictWorker().process_request({"scenario": get_preset("straight"), "k_values": [0.5, 2.0]})
    assert not result["success"]
    assert "k_aggr out of [0,1]" in result["message"]
    assert result["error"].startswith("ValidationError")


def test_validate_worker_runs_every_suite():
    result = ValidateWorker().process_request({"seed": 0})
    assert result["success"], result["message"]
    assert [s["suite"] for s in result["suites"]] == list(SUITES)
    assert all(s["passed"] for s in result["suites"])
    for outcome in result["suites"]:
        assert type(outcome["passed"]) is bool
        assert type(outcome["value"]) is float and type(outcome["tolerance"]) is float
    json.dumps(result)


def test_validate_worker_unknown_suite():
    result = ValidateWorker().process_request({"suites": ["barrier", "vibes"]})
    assert not result["success"]
    assert "vibes" in result["message"]
    assert "suites" not in result


def test_validate_worker_catches_broken_model(monkeypatch):
    original = error_space.coupled_rhs

    def flipped(x, u, wind, path, params=error_space.ZAGI):
        rates = original(x, u, wind, path, params)
        rates[1] = -rates[1]
        return rates

    monkeypatch.setattr(error_space, "coupled_rhs", flipped)
    result = ValidateWorker().process_request({"suites": ["equivalence_straight", "barrier"]})
    assert not result["success"]
    outcome = {s["suite"]: s["passed"] for s in result["suites"]}
    assert outcome == {"equivalence_straight": False, "barrier": True}
    assert result["error"] == "equivalence_straight"


def test_orchestrator_status(orchestrator):
    status = orchestrator.get_system_status()
    assert set(status["workers"]) == {"solve", "predict", "validate"}
    assert status["scenarios"] == ["straight", "turn90"]
    assert status["num_threads"] == 1
    assert status["artifact_store"]["runs"] == 0


def status_from_report(report):
    stages = [StageRecord(index=s["stage"], mu=s["barrier_mu"], delta=s["barrier_delta"], status=s["status"])
              for s in report["stages"]]
    return overall_status(stages, report["max_violation"] > 1e-3)


def read_trajectory(run_dir):
    with open(os.path.join(run_dir, TRAJECTORY_FILE), encoding="utf-8") as f:
        rows = list(csv.reader(f))
    table = np.array(rows[1:], dtype=float)
    return Curve(table[:, 0], table[:, 1:10], table[:, 10:14])


def test_orchestrator_solve_writes_artifacts(orchestrator):
    scenario = load_scenario(json.dumps(SHORT_SCENARIO))
    result = orchestrator.run_solve(scenario, seed=7)
    assert result["success"], result.get("error")
    assert os.path.basename(result["run_dir"]) == "straight_k0.00"
    manifest = orchestrator.store.load_manifest(result["run_dir"])
    assert manifest["summary"]["seed"] == 7
    for name in manifest["files"]:
        assert os.path.exists(os.path.join(result["run_dir"], name))
    with open(os.path.join(result["run_dir"], TRAJECTORY_FILE), encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0][0] == "t"
    assert len(rows) == 1 + 41
    with open(os.path.join(result["run_dir"], REPORT_FILE), encoding="utf-8") as f:
        report = json.load(f)
    assert report["max_defect"] < 1e-8
    assert result["status"] == manifest["summary"]["status"] == report["status"] == status_from_report(report)


def test_orchestrator_sweep_summary(orchestrator):
    scenario = load_scenario(json.dumps(SHORT_SCENARIO))
    result = orchestrator.run_sweep(scenario, [0.0, 1.0])
    assert [row["k"] for row in result["rows"]] == [0.0, 1.0]
    assert len(result["results"]) == 2
    assert os.path.isdir(os.path.join(orchestrator.store.output_dir, "straight_k1.00"))
    with open(result["summary_file"], encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert lines[0] == "k,T_pred,T_achieved,iterations,worst_residual"
    assert len(lines) == 3


def test_cli_predict(capsys, tmp_path):
    code = cli.main(["predict", "--scenario", "straight", "--k-aggr", "0,1", "--out", str(tmp_path)])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "126.5" in out
    assert "40.3" in out


def test_cli_rejects_out_of_range_k(capsys, tmp_path):
    code = cli.main(["solve", "--k-aggr", "1.5", "--out", str(tmp_path)])
    assert code == cli.EXIT_ERROR
    assert "k_aggr out of [0,1]" in capsys.readouterr().err


def test_cli_sweep_checks_every_k_first(capsys, tmp_path):
    code = cli.main(["sweep", "--k-aggr", "0,1.2", "--out", str(tmp_path)])
    assert code == cli.EXIT_ERROR
    assert not os.path.exists(os.path.join(str(tmp_path), "sweep_summary.csv"))


def test_cli_bad_scenario_file(capsys, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    code = cli.main(["predict", "--scenario", f"file:{broken}", "--out", str(tmp_path)])
    assert code == cli.EXIT_ERROR
    assert "not valid JSON" in capsys.readouterr().err


def test_cli_k_list_parsing():
    assert cli.parse_k_list("0, 0.5,1") == [0.0, 0.5, 1.0]
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["predict", "--k-aggr", "a,b"])


def test_cli_validate(capsys):
    code = cli.main(["validate", "--suites", "barrier,transform_roundtrip"])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert out.count("PASS") == 2
    assert cli.main(["validate", "--suites", "vibes"]) == cli.EXIT_ERROR


def test_cli_solve_short_scenario(capsys, tmp_path, short_file):
    code = cli.main(["solve", "--scenario", f"file:{short_file}", "--out", str(tmp_path / "out")])
    assert "artifacts in" in capsys.readouterr().out
    with open(os.path.join(str(tmp_path / "out"), "straight_k0.00", "manifest.json"), encoding="utf-8") as f:
        status = json.load(f)["summary"]["status"]
    assert code == (cli.EXIT_OK if status == "converged" else cli.EXIT_INCOMPLETE)


def test_cli_stalled_solve_exits_incomplete(monkeypatch, capsys, tmp_path, short_file):
    def no_step(model, traj, direction, gains, desired, weights, mu, delta, cost, options):
        return None, cost, 0.0

    monkeypatch.setattr(trajopt, "_line_search", no_step)
    code = cli.main(["solve", "--scenario", f"file:{short_file}", "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_INCOMPLETE
    assert "status 'stalled'" in capsys.readouterr().err
    with open(os.path.join(str(tmp_path / "out"), "straight_k0.00", "manifest.json"), encoding="utf-8") as f:
        assert json.load(f)["summary"]["status"] == "stalled"


def test_same_seed_gives_identical_artifacts(orchestrator):
    scenario = load_scenario(json.dumps(SHORT_SCENARIO))
    first = orchestrator.run_solve(scenario, seed=3, run_name="first")
    second = orchestrator.run_solve(scenario, seed=3, run_name="second")
    for name in (TRAJECTORY_FILE, REPORT_FILE):
        contents = []
        for result in (first, second):
            with open(os.path.join(result["run_dir"], name), "rb") as f:
                contents.append(f.read())
        assert contents[0] == contents[1]


def test_manifest_summary_matches_trajectory(orchestrator):
    scenario = load_scenario(json.dumps(SHORT_SCENARIO))
    result = orchestrator.run_solve(scenario)
    summary = orchestrator.store.load_manifest(result["run_dir"])["summary"]
    with open(os.path.join(result["run_dir"], REPORT_FILE), encoding="utf-8") as f:
        report = json.load(f)
    traj = read_trajectory(result["run_dir"])
    assert traj.t[0] == 0.0 and traj.t[-1] == pytest.approx(8.0)
    achieved = rendezvous_time(traj, 1.0)
    if achieved is None:
        assert summary["rendezvous_time"] is None
    else:
        assert summary["rendezvous_time"] == pytest.approx(achieved)
    assert summary["iterations"] == report["iterations"]
    assert summary["worst_residual"] == report["max_violation"]
    assert summary["status"] == status_from_report(report)


@pytest.mark.slow
def test_straight_gentle_descent_meets_prediction(orchestrator):
    result = orchestrator.run_solve(get_preset("straight"))
    assert result["success"], result.get("error")
    summary = result["summary"]
    assert summary["status"] == "converged"
    assert summary["worst_residual"] <= 1e-3
    assert summary["rendezvous_time"] == pytest.approx(126.7, rel=0.05)
    assert summary["max_defect"] < 1e-8
