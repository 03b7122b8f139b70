"""Exit codes and artifacts of the command line interface."""

import csv
import json
import shutil
import subprocess

import pytest

from stagegame import cli
from stagegame.game import serialize_game
from stagegame.te import build_te_game, default_params


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def scenario_text():
    return json.dumps(serialize_game(build_te_game(default_params())))


def test_solve_writes_report(tmp_path):
    out = tmp_path / "report.json"
    rc = cli.main(["solve", "--builtin", "te", "--x0", "effectual", "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())
    assert report["x0"] == "effectual"
    assert report["converged"] is True
    assert report["epsilon"] <= 1e-6
    assert report["discrepancy"] <= 1e-8
    assert set(report) >= {"strategies", "beliefs", "values", "trace", "iterations"}


def test_solve_stdout_is_json(capsys):
    rc = cli.main(["solve", "--builtin", "te", "--x0", "ineffectual"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["converged"] is True


def test_validate_builtin(capsys):
    rc = cli.main(["validate", "--builtin", "te"])
    assert rc == 0
    assert capsys.readouterr().out.startswith("ok: horizon 2")


def test_validate_scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(scenario_text())
    rc = cli.main(["validate", "--scenario", str(path)])
    assert rc == 0


def test_malformed_scenario_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    rc = cli.main(["validate", "--scenario", str(path)])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_missing_scenario_exits_2(tmp_path):
    rc = cli.main(["validate", "--scenario", str(tmp_path / "absent.json")])
    assert rc == 2


def test_both_sources_rejected(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(scenario_text())
    rc = cli.main(["validate", "--builtin", "te", "--scenario", str(path)])
    assert rc == 2


def test_no_source_rejected():
    assert cli.main(["solve", "--x0", "effectual"]) == 2


def test_unknown_x0_exits_2():
    assert cli.main(["solve", "--builtin", "te", "--x0", "nowhere"]) == 2


@pytest.mark.parametrize(
    "payload",
    [
        '{"no_such_field": 1}',
        '[1, 2, 3]',
        '{"ineffectual_discount": 1.5}',
    ],
)
def test_bad_params_file_exits_2(tmp_path, payload):
    path = tmp_path / "params.json"
    path.write_text(payload)
    assert cli.main(["validate", "--builtin", "te", "--params", str(path)]) == 2


def test_non_convergence_exits_3_report_still_written(tmp_path):
    params = tmp_path / "params.json"
    params.write_text(json.dumps({
        "compromised_rewards": [1800, 1200, 600, 100],
        "train_cost_primitive": 50,
        "train_cost_sophisticated": 120,
    }))
    out = tmp_path / "report.json"
    rc = cli.main([
        "solve", "--builtin", "te", "--params", str(params),
        "--x0", "effectual", "--iters", "6", "--out", str(out),
    ])
    assert rc == 3
    report = json.loads(out.read_text())
    assert report["converged"] is False
    assert len(report["trace"]) == 6


def test_sweep_belief_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    rc = cli.main(["sweep-belief", "--points", "5", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out)
    assert rows[0][0] == "belief"
    assert rows[0][-1] == "jump"
    assert "user:sophisticated:encrypted-command" not in rows[0]
    assert "user:adversarial:encrypted-command" in rows[0]
    assert len(rows[0]) == 14
    assert len(rows) == 6
    assert float(rows[1][0]) == 0.0
    assert float(rows[-1][0]) == 1.0


def test_sweep_sensitivity_csv(tmp_path):
    out = tmp_path / "sens.csv"
    rc = cli.main([
        "sweep-sensitivity", "--lo", "0", "--hi", "2400", "--points", "3",
        "--out", str(out),
    ])
    assert rc == 0
    rows = read_csv(out)
    assert rows[0] == ["detection_reward_primitive", "state", "defender_utility",
                       "attacker_utility"]
    assert len(rows) == 1 + 3 * 4


def test_sweep_sensitivity_needs_two_points():
    assert cli.main(["sweep-sensitivity", "--points", "1"]) == 2


def test_posterior_csv(tmp_path):
    out = tmp_path / "posterior.csv"
    rc = cli.main(["posterior", "--points", "5", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out)
    assert rows[0] == ["prior", "posterior", "converged"]
    assert all(r[2] == "1" for r in rows[1:])


def test_state_dist_csv(tmp_path):
    out = tmp_path / "dist.csv"
    rc = cli.main(["state-dist", "--points", "3", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out)
    assert rows[0] == ["prior", "state", "probability"]
    assert len(rows) == 1 + 3 * 4


def test_compare_info_csv(tmp_path):
    out = tmp_path / "info.csv"
    rc = cli.main(["compare-info", "--x0", "effectual", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out)
    assert rows[0] == ["regime", "x0", "defender_type", "player", "utility"]
    assert {r[0] for r in rows[1:]} == {"complete", "one-sided", "double-sided"}


def test_rollout_payload_and_determinism(tmp_path):
    args = ["rollout", "--builtin", "te", "--x0", "effectual",
            "--episodes", "400", "--seed", "11"]
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(args + ["--out", str(first)]) == 0
    assert cli.main(args + ["--out", str(second)]) == 0
    payload = json.loads(first.read_text())
    assert payload["solver"]["converged"] is True
    assert payload["episodes"] == 400
    assert payload["generator"] == "philox"
    assert first.read_text() == second.read_text()


def test_console_script_runs():
    exe = shutil.which("stagegame")
    assert exe is not None
    proc = subprocess.run([exe, "validate", "--builtin", "te"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("ok:")
