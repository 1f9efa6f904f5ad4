import json

import pytest

from dfplay.cli import build_parser, main
from dfplay.games import matching_pennies
from dfplay.normal_form.fileio import GameFile, save_game


def last_json(capsys) -> dict:
    lines = [line for line in capsys.readouterr().out.splitlines() if line.strip()]
    return json.loads(lines[-1])


def test_verify_game_on_coordination(tmp_path, capsys, coordination_game_file):
    path = save_game(coordination_game_file, tmp_path / "coordination.json")
    q_csv = tmp_path / "q.csv"

    code = main(
        [
            "-qq",
            "verify-game",
            str(path),
            "--eps-bar",
            "1e-6",
            "--samples",
            "300",
            "--q-csv",
            str(q_csv),
            "--json",
        ]
    )
    assert code == 0

    report = last_json(capsys)
    assert report["flags"]["equilibria"]
    assert report["facts"]["M"] == 2
    assert report["facts"]["d_star"] == 2.0
    assert report["facts"]["delta_source"] == "exact"
    assert q_csv.is_file()


def test_verify_game_on_pennies(tmp_path, capsys):
    path = save_game(GameFile(matching_pennies(), name="pennies"), tmp_path / "p.json")

    assert main(["-qq", "verify-game", str(path), "--samples", "100", "--json"]) == 0
    report = last_json(capsys)
    assert not report["flags"]["equilibria"]
    assert report["facts"]["potential"] == "no"
    assert report["facts"]["delta_source"] == "lsq"


def test_simulate_from_a_config_file(tmp_path, target_config):
    path = target_config().write(tmp_path / "config.json")
    out = tmp_path / "cli-out"

    code = main(
        ["-qq", "simulate", "--config", str(path), "--runs", "1", "--out", str(out)]
    )
    assert code == 0
    assert (out / "report.json").is_file()
    assert not (out / "runs" / "ring" / "run_001.csv").exists()


def test_bad_config_exits_with_two(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"dfp": {"foo": 1}}')
    assert main(["-qq", "simulate", "--config", str(path)]) == 2


def test_missing_file_exits_with_one(tmp_path):
    assert main(["-qq", "simulate", "--config", str(tmp_path / "missing.json")]) == 1


def test_analyze_without_runs_exits_with_two(tmp_path):
    assert main(["-qq", "analyze", str(tmp_path)]) == 2


def test_reproduce_fig1_writes_charts(tmp_path):
    out = tmp_path / "fig1"
    code = main(
        ["-qq", "reproduce-fig1", "--out", str(out), "--runs", "1", "--horizon", "5"]
    )
    assert code == 0
    assert (out / "fig1_ne_distance.svg").is_file()
    assert (out / "fig1_estimation_error.svg").is_file()


def test_simulate_needs_a_source():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["simulate"])
    with pytest.raises(SystemExit):
        build_parser().parse_args(["simulate", "--preset", "fig1", "--network", "torus"])


@pytest.mark.parametrize(
    "text",
    [
        '{"n_agents": 1, "n_actions": 2, "utilities": [[NaN, 1.0]]}',
        '{"n_agents": 1, "n_actions": 2, "utilities": [[0.0, 1.0]],'
        ' "mixed_equilibria": [[[0.5, 0.5], [1.0]]]}',
    ],
    ids=["nan-utility", "ragged-mixed"],
)
def test_malformed_game_files_exit_with_two(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    assert main(["-qq", "verify-game", str(path)]) == 2
