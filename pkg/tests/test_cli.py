import json
from pathlib import Path

import pytest

from softeq import data_path
from softeq.cli import main, parse_alpha_list, CliError

PD = str(data_path("prisoners_dilemma.json"))
FIVE = str(data_path("five_by_five.json"))
SEPARABLE = str(data_path("separable_pair.json"))


def test_parse_alpha_list():
    assert parse_alpha_list("0,1,inf") == (0.0, 1.0, float("inf"))
    assert parse_alpha_list(" 2 , 4 ") == (2.0, 4.0)
    with pytest.raises(CliError):
        parse_alpha_list("one")
    with pytest.raises(CliError):
        parse_alpha_list(",")


def test_solve_prints_report(capsys):
    code = main(["solve", "--game", PD, "--alpha", "1"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["converged"] is True
    assert payload["per_player_payoff"][0] == pytest.approx(2.3903882, abs=1e-4)
    assert payload["profile"][0][0] == pytest.approx(0.390388, abs=1e-4)


def test_solve_writes_report_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["solve", "--game", PD, "--alpha", "2", "--out", str(out)])
    assert code == 0
    on_disk = json.loads(out.read_text())
    printed = json.loads(capsys.readouterr().out)
    assert on_disk == printed


def test_solve_rejects_infinite_alpha(capsys):
    code = main(["solve", "--game", PD, "--alpha", "inf"])
    assert code == 2
    assert "nash" in capsys.readouterr().err


def test_solve_rejects_unknown_transform(capsys):
    code = main(["solve", "--game", PD, "--transform", "cube"])
    assert code == 2
    assert "transform" in capsys.readouterr().err


def test_missing_game_file(capsys):
    code = main(["solve", "--game", "/nonexistent/game.json"])
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_json_parse_error_includes_position(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"players": 2,\n  "actions": [2 2]\n}\n')
    code = main(["solve", "--game", str(bad)])
    assert code == 2
    err = capsys.readouterr().err
    assert str(bad) in err
    assert ":2:" in err


def test_invalid_game_document(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"players": 2, "actions": [2]}\n')
    code = main(["solve", "--game", str(bad)])
    assert code == 2
    assert "actions" in capsys.readouterr().err


def test_sweep_command(tmp_path, capsys):
    out = tmp_path / "sweep"
    code = main([
        "sweep", "--game", PD, "--alpha", "0,1,100",
        "--restarts", "2", "--seed", "0", "--out", str(out),
    ])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "results:" in stdout
    lines = (out / "results.csv").read_text().splitlines()
    assert len(lines) == 7
    assert (out / "plot.svg").exists()
    assert (out / "manifest.json").exists()


def test_sweep_reruns_identically(tmp_path):
    args = ["sweep", "--game", PD, "--alpha", "1,4", "--restarts", "2", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("results.csv", "summary.json", "plot.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_society_command(tmp_path, capsys):
    out = tmp_path / "soc"
    code = main([
        "society", "--population", "14", "--actions", "3", "--avg-neighbors", "4",
        "--society-seed", "1", "--alpha", "10,inf", "--restarts", "3",
        "--seed", "0", "--out", str(out), "--degree-histogram",
    ])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "degree,count" in stdout
    histogram_rows = [
        line for line in stdout.splitlines()
        if line and line[0].isdigit() and "," in line
    ]
    assert sum(int(row.split(",")[1]) for row in histogram_rows) == 14
    lines = (out / "results.csv").read_text().splitlines()
    assert len(lines) == 7
    summary = json.loads((out / "summary.json").read_text())
    assert summary["population"] == 14


def test_quantum_command(tmp_path):
    out = tmp_path / "q"
    code = main(["quantum", "--game", SEPARABLE, "--record-every", "500", "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["converged"] is True
    assert abs(summary["lambda"][0]) < 1e-6
    rows = (out / "results.csv").read_text().splitlines()
    assert rows[0] == "time,player,lambda,residual,entropy"


def test_quantum_rejects_bad_dt(capsys):
    code = main(["quantum", "--game", SEPARABLE, "--dt", "2.0", "--out", "/tmp/unused_q"])
    assert code == 2
    assert "dt" in capsys.readouterr().err


def test_nash_command(tmp_path):
    out = tmp_path / "n"
    code = main(["nash", "--game", FIVE, "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["equilibrium_count"] == 1
    rows = (out / "results.csv").read_text().splitlines()
    assert rows[1].startswith("inf,")


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "solve" in capsys.readouterr().out


def test_unknown_command_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
