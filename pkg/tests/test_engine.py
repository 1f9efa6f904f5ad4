import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dfplay.analysis.monitors import frequency_drift, step_size_violations
from dfplay.engine import (
    best_response,
    DfpSettings,
    DfpState,
    dfp_step,
    empirical_update,
    run,
)
from dfplay.exc import AssumptionError
from dfplay.games import identity_coordination
from dfplay.network import build_weights, GraphSchedule
from dfplay.normal_form import NormalFormGame, TableOracle


def test_empirical_update():
    assert empirical_update(np.array([0.5, 0.5]), 0, 1).tolist() == [1.0, 0.0]
    assert empirical_update(np.array([1.0, 0.0]), 1, 2).tolist() == [0.5, 0.5]
    assert empirical_update(np.array([0.5, 0.5]), 0, 2).tolist() == [0.75, 0.25]

    with pytest.raises(ValueError):
        empirical_update(np.array([0.5, 0.5]), 0, 0)
    with pytest.raises(IndexError):
        empirical_update(np.array([0.5, 0.5]), 2, 1)


def test_best_response_tiebreaks(coordination):
    oracle = TableOracle(coordination)
    uniform = np.full((2, 2), 0.5)

    assert best_response(oracle, 0, uniform) == 0
    assert best_response(oracle, 0, np.array([[0.5, 0.5], [0.2, 0.8]])) == 1

    rng = np.random.default_rng(1)
    picks = {best_response(oracle, 0, uniform, "uniform", rng) for _ in range(50)}
    assert picks == {0, 1}

    with pytest.raises(ValueError):
        best_response(oracle, 0, uniform, "uniform")


def test_centralized_coordination_locks_in(coordination):
    trajectory = run(TableOracle(coordination), None, DfpSettings(50, centralized=True))

    assert (trajectory.actions == 0).all()
    assert np.allclose(trajectory.frequencies[-1], [[1.0, 0.0], [1.0, 0.0]])
    assert trajectory.max_regret.max() <= 1e-12
    assert (trajectory.belief_error == 0).all()


def test_decentralized_beliefs_approach_frequencies():
    game = identity_coordination(2, 3)
    weights = build_weights(GraphSchedule(3, "ring"), 0.5)
    trajectory = run(TableOracle(game), weights, DfpSettings(40))

    assert (trajectory.actions == 0).all()
    assert trajectory.belief_error[0] > 0
    assert trajectory.belief_error[-1] < trajectory.belief_error[0] * 1e-3


def test_decentralized_play_needs_weights(coordination):
    with pytest.raises(ValueError):
        run(TableOracle(coordination), None, DfpSettings(5))


def test_run_is_deterministic_given_generators():
    game = identity_coordination(3, 3)
    weights = build_weights(GraphSchedule(3, "star"), 0.6)
    settings_ = DfpSettings(60, tiebreak="uniform", initial="dirichlet")

    def once():
        return run(
            TableOracle(game),
            weights,
            settings_,
            init_rng=np.random.default_rng(4),
            tiebreak_rng=np.random.default_rng(5),
        )

    a, b = once(), once()
    assert np.array_equal(a.actions, b.actions)
    assert np.array_equal(a.frequencies, b.frequencies)
    assert np.array_equal(a.belief_error, b.belief_error)
    assert np.array_equal(a.joint(0), a.initial.ravel())


def test_uncopied_initial_beliefs_start_uniform():
    game = identity_coordination(2, 2)
    weights = build_weights(GraphSchedule(2, "ring"), 0.5)
    settings_ = DfpSettings(
        1, initial=[[1.0, 0.0], [0.0, 1.0]], copy_initial=False, keep_beliefs=True
    )
    trajectory = run(TableOracle(game), weights, settings_)

    # Against a uniform copy both actions tie, so both agents pick 0.
    assert trajectory.actions[0].tolist() == [0, 0]
    assert trajectory.beliefs.shape == (1, 2, 2, 2)


def test_every_step_is_reported():
    game = identity_coordination(2, 2)
    seen = []
    settings_ = DfpSettings(7, centralized=True)
    run(TableOracle(game), None, settings_, on_step=lambda s: seen.append(s.t))
    assert seen == list(range(1, 8))


def test_debug_mode_stops_on_bad_weights(coordination):
    weights = build_weights(GraphSchedule(2, "ring"), 0.5)
    weights.eta = 0.9
    state = DfpState.initial(np.full((2, 2), 0.5))

    with pytest.raises(AssumptionError) as info:
        dfp_step(TableOracle(coordination), state, weights, debug=True)
    assert info.value.check == "weights"
    assert dfp_step(TableOracle(coordination), state, weights).t == 1


def test_settings_validation():
    with pytest.raises(ValueError):
        DfpSettings(0).validate()
    with pytest.raises(ValueError):
        DfpSettings(5, tiebreak="random").validate()
    with pytest.raises(ValueError):
        DfpSettings(5, initial="zeros").validate()
    with pytest.raises(ValueError):
        DfpSettings(5, initial="dirichlet").initial_frequencies(2, 2)


@settings(max_examples=15, deadline=None)
@given(
    seed=st.integers(0, 10 ** 6),
    n=st.integers(1, 4),
    k=st.integers(2, 3),
    centralized=st.booleans(),
)
def test_steps_respect_the_size_bound(seed, n, k, centralized):
    rng = np.random.default_rng(seed)
    game = NormalFormGame(rng.uniform(-1, 1, size=(n,) + (k,) * n))
    weights = build_weights(GraphSchedule(n, "ring"), 0.5)
    trajectory = run(
        TableOracle(game),
        weights,
        DfpSettings(40, initial="dirichlet", centralized=centralized),
        init_rng=rng,
    )

    assert step_size_violations(trajectory)
    assert frequency_drift(trajectory) <= 1e-12
    assert np.allclose(trajectory.frequencies.sum(axis=2), 1)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10 ** 6), k=st.integers(2, 3))
def test_exact_copies_on_a_complete_graph_replay_centralized_play(seed, k):
    rng = np.random.default_rng(seed)
    game = NormalFormGame(rng.normal(size=(3,) + (k,) * 3))
    weights = build_weights(GraphSchedule(3, "complete"), 0.75, "exact")

    def play(weights_, centralized):
        return run(
            TableOracle(game),
            weights_,
            DfpSettings(60, initial="dirichlet", centralized=centralized),
            init_rng=np.random.default_rng(seed),
        )

    central, local = play(None, True), play(weights, False)
    assert (central.actions == local.actions).all()
    assert np.array_equal(central.frequencies, local.frequencies)
    assert (local.belief_error == 0).all()
