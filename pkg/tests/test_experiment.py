import json
from pathlib import Path

import numpy as np
import pytest

from dfplay.exc import AssumptionError, ConfigError, ShapeError
from dfplay.experiment import analyze, rebuild_frequencies, reproduce_fig1, simulate
from dfplay.experiment.artifacts import read_aggregate_csv, read_trajectory_csv
from dfplay.experiment.config import ExperimentConfig, load_config, preset
from dfplay.experiment.runner import build_scenario, stream_rng
from dfplay.normal_form import enumerate_pure_ne
from dfplay.normal_form.fileio import load_game, save_game


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({"dfp": {"foo": 1}})
    assert info.value.key == "dfp.foo"

    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({"engine": {}})
    assert info.value.key == "engine"

    with pytest.raises(ConfigError):
        ExperimentConfig.decode("{broken")


def test_validation_names_the_bad_key():
    config = ExperimentConfig.from_dict({"scenario": {"n_agents": 4, "n_targets": 3}})
    with pytest.raises(ConfigError) as info:
        config.validate()
    assert info.value.key == "scenario.n_targets"

    config = ExperimentConfig.from_dict({"network": {"kinds": ["static"]}})
    with pytest.raises(ConfigError) as info:
        config.validate()
    assert info.value.key == "network.edges"

    config = ExperimentConfig.from_dict({"dfp": {"initial": [[1.0, 0.0]]}})
    with pytest.raises(ConfigError) as info:
        config.validate()
    assert info.value.key == "dfp.initial"


def test_presets_and_overrides():
    config = preset("fig1")
    assert config.dims == (10, 10)
    assert config.network.kinds == ["ring", "star"]

    config.override(seed=3, runs=2, networks=["complete"], strict=True, out="elsewhere")
    assert config.replication.seed == 3
    assert config.replication.n_runs == 2
    assert config.network.kinds == ["complete"]
    assert config.analysis.strict
    assert config.output.dir == "elsewhere"
    assert preset("desk").validate().dims == (2, 3)

    with pytest.raises(ConfigError):
        preset("nope")


def test_config_survives_its_own_serialization(target_config, tmp_path):
    config = target_config()
    path = config.write(tmp_path / "cfg" / "config.json")
    assert dict(ExperimentConfig.decode(path.read_text())) == dict(config)


def test_streams_are_independent():
    a = stream_rng(5, 0, "signals").random(4)
    assert np.array_equal(a, stream_rng(5, 0, "signals").random(4))
    assert not np.array_equal(a, stream_rng(5, 0, "tiebreak").random(4))
    assert not np.array_equal(a, stream_rng(5, 1, "signals").random(4))
    assert not np.array_equal(a, stream_rng(6, 0, "signals").random(4))


def test_same_run_index_plays_the_same_game(target_config):
    config = target_config()
    a, b = build_scenario(config, 1), build_scenario(config, 1)
    assert a.meta["distances"] == b.meta["distances"]
    assert build_scenario(config, 0).meta["distances"] != a.meta["distances"]


def test_simulate_writes_every_artifact(target_config):
    outcome = simulate(target_config())
    out = outcome.out

    for name in (
        "config.json",
        "runs/ring/run_000.csv",
        "runs/ring/run_001.csv",
        "runs/star/run_001.csv",
        "aggregate_ring.csv",
        "aggregate_star.csv",
        "summaries.json",
        "report.json",
        "manifest.json",
    ):
        assert (out / name).is_file(), name

    stored = read_trajectory_csv(out / "runs" / "ring" / "run_000.csv")
    assert stored.horizon == 30
    assert stored.n_agents == 3
    assert stored.t.tolist() == list(range(1, 31))

    agg = read_aggregate_csv(out / "aggregate_star.csv")
    assert set(agg) == {"t", "avg_ne_distance", "avg_belief_error"}
    assert len(agg["t"]) == 30

    report = json.loads((out / "report.json").read_text())
    assert report["flags"]["ring.step_size"]
    assert report["flags"]["star.frequency_drift"]
    assert "star_faster" in report["flags"]

    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["files"]) == len(outcome.files)


def test_single_step_horizon(target_config):
    outcome = simulate(target_config(dfp={"horizon": 1}, replication={"n_runs": 1}))
    stored = read_trajectory_csv(outcome.out / "runs" / "star" / "run_000.csv")
    assert stored.horizon == 1


def test_reruns_are_byte_identical(target_config, tmp_path):
    first = simulate(target_config(output={"dir": str(tmp_path / "a")})).out
    second = simulate(target_config(output={"dir": str(tmp_path / "b")})).out

    for name in ("runs/ring/run_001.csv", "runs/star/run_000.csv", "aggregate_ring.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_analyze_rechecks_stored_runs(target_config):
    out = simulate(target_config()).out
    report = analyze(out, final_window=10)

    assert report.flags["ring.step_size"]
    assert report.flags["star.aggregate"]
    assert "ring.one_to_one" in report.flags
    assert (out / "analysis.json").is_file()


def test_analyze_needs_stored_runs(tmp_path):
    with pytest.raises(ShapeError):
        analyze(tmp_path)


def test_rebuilt_frequencies_are_running_means():
    actions = np.array([[0, 1], [1, 1], [0, 0]])
    freqs = rebuild_frequencies(actions)
    assert freqs.shape == (3, 2, 2)
    assert freqs[1, 0].tolist() == [0.5, 0.5]
    assert freqs[2, 1].tolist() == pytest.approx([1 / 3, 2 / 3])


def test_strict_mode_stops_on_a_disconnected_graph(target_config):
    config = target_config(
        network={"kinds": ["static"], "edges": [[0, 1]]},
        analysis={"strict": True},
    )
    with pytest.raises(AssumptionError) as info:
        simulate(config)
    assert info.value.check == "connectivity"


def test_perturbed_games_are_monitored(target_config):
    config = target_config(
        scenario={"kind": "perturbed", "n_agents": 2, "n_actions": 3, "delta": 0.05},
        network={"kinds": ["complete"]},
        dfp={"horizon": 300, "initial": "dirichlet"},
        analysis={"burn_in": 20},
    )
    outcome = simulate(config)

    for result in outcome.results["complete"]:
        summary = result.summary
        assert summary.delta <= 0.05 + 1e-12
        assert summary.increments is not None
        assert summary.excursions is not None
        assert summary.flags["step_size"]
    assert "complete.potential_increment" in outcome.report.flags


def test_game_scenario_from_a_file(target_config, tmp_path, coordination_game_file):
    path = save_game(coordination_game_file, tmp_path / "coordination.json")
    config = target_config(
        scenario={"kind": "game", "game_file": str(path), "n_agents": 2},
        network={"kinds": ["ring"]},
    )
    outcome = simulate(config)

    summary = outcome.results["ring"][0].summary
    assert summary.final_profile == [0, 0]
    assert summary.basin["verdict"] == [0, 0]
    assert summary.delta == 0.0
    assert summary.increments is None
    assert outcome.report.flags["ring.single_basin"]


@pytest.mark.slow
def test_target_assignment_reproduction(tmp_path):
    outcome = reproduce_fig1(tmp_path / "fig1", runs=2, horizon=100, seed=1)

    assert outcome.report.flags["ring.step_size"]
    assert outcome.report.flags["star.step_size"]
    assert (outcome.out / "fig1_ne_distance.svg").is_file()
    assert (outcome.out / "fig1_estimation_error.svg").is_file()
    assert len(outcome.results["ring"]) == 2


ROOT = Path(__file__).resolve().parent.parent


@pytest.mark.parametrize("name", ["fig1", "desk", "centralized"])
def test_shipped_configs_match_presets(name):
    shipped = load_config(ROOT / "configs" / f"{name}.json")
    assert dict(shipped) == dict(preset(name))


def test_shipped_games_load():
    coordination = load_game(ROOT / "games" / "coordination.json")
    pennies = load_game(ROOT / "games" / "matching_pennies.json")

    assert enumerate_pure_ne(coordination.game) == [(0, 0), (1, 1)]
    assert len(coordination.mixed_equilibria) == 1
    assert enumerate_pure_ne(pennies.game) == []


def test_unknown_delta_leaves_the_basin_gate_vacuous(target_config):
    # Six targets for five agents is past the dense-table limit, so delta stays unknown.
    config = target_config(
        scenario={"n_agents": 5, "n_targets": 6},
        replication={"n_runs": 1},
    )
    outcome = simulate(config)

    for kind in ("ring", "star"):
        summary = outcome.results[kind][0].summary
        assert summary.delta is None
        assert summary.basin == {"skipped": True, "threshold": None}

        gate = next(c for c in outcome.report.checks if c.name == f"{kind}.single_basin")
        assert gate.ok
        assert "vacuous" in gate.message


def test_exact_preset_replays_centralized_play(tmp_path):
    def play(centralized: bool):
        config = preset("centralized").override(runs=2, out=str(tmp_path / str(centralized)))
        config.dfp.horizon = 80
        config.dfp.centralized = centralized
        return simulate(config).results["complete"]

    for local, central in zip(play(False), play(True)):
        assert np.array_equal(local.trajectory.actions, central.trajectory.actions)
        assert (local.trajectory.belief_error == 0).all()


@pytest.mark.slow
def test_target_assignment_acceptance(tmp_path):
    report = simulate(preset("fig1").override(out=str(tmp_path / "fig1"))).report

    for name in ("ring.one_to_one", "star.one_to_one", "star_faster"):
        assert report.flags[name], name
    assert report.flags["ring.single_basin"]
    assert report.flags["star.single_basin"]


@pytest.mark.slow
@pytest.mark.parametrize("centralized", [False, True])
def test_near_potential_acceptance(tmp_path, centralized):
    config = preset("desk").override(out=str(tmp_path / "desk"))
    config.dfp.centralized = centralized
    outcome = simulate(config)

    assert outcome.report.flags["complete.potential_increment"]
    assert outcome.report.flags["complete.single_basin"]
    for result in outcome.results["complete"]:
        increments = result.summary.increments
        assert len(increments["violations"]) <= 0.05 * increments["qualifying"]
