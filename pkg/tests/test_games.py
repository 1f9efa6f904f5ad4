from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dfplay.exc import GuardError, ShapeError
from dfplay.games import (
    default_geometry,
    estimate_targets,
    identity_coordination,
    one_to_one_profiles,
    SignalModel,
    ta_expected_utility,
    ta_potential,
    ta_utility,
    TargetAssignmentGame,
    TargetOracle,
)
from dfplay.normal_form import enumerate_pure_ne, NormalFormGame
from dfplay.normal_form.potential import check_potential


def test_identity_coordination_equilibria(pennies):
    assert enumerate_pure_ne(identity_coordination(3, 2)) == [(0, 0), (1, 1), (2, 2)]
    assert len(enumerate_pure_ne(identity_coordination(2, 3))) == 2
    assert enumerate_pure_ne(pennies) == []


def test_target_utility_shares_nothing():
    game = TargetAssignmentGame(np.array([[1.0, 2.0], [3.0, 4.0], [0.5, 0.25]]))

    assert ta_utility(game, 0, (0, 0, 1)) == 0.0
    assert ta_utility(game, 1, (0, 0, 1)) == 0.0
    assert ta_utility(game, 2, (0, 0, 1)) == 4.0
    assert game.utility(0, (1, 0, 0)) == 0.5

    with pytest.raises(ShapeError):
        ta_utility(game, 0, (0, 1))


def test_target_game_validation():
    with pytest.raises(ValueError):
        TargetAssignmentGame(np.array([[1.0, 0.0]]))
    with pytest.raises(ShapeError):
        TargetAssignmentGame(np.ones(3))
    with pytest.raises(ValueError):
        TargetAssignmentGame(np.array([[1.0, 2.0]]), equal_distance=1.0)
    with pytest.raises(ValueError):
        TargetAssignmentGame.equal(2, 2, d=0)


def test_expected_utility_matches_enumeration(rng):
    for _ in range(200):
        n, k = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        game = TargetAssignmentGame(rng.uniform(0.1, 2.0, size=(n, k)))
        beliefs = rng.dirichlet(np.ones(k), size=n)
        agent, action = int(rng.integers(n)), int(rng.integers(k))

        brute = 0.0
        for profile in product(range(k), repeat=n):
            if profile[agent] != action:
                continue
            weight = np.prod([beliefs[j, profile[j]] for j in range(n) if j != agent])
            brute += weight * ta_utility(game, agent, profile)

        assert ta_expected_utility(game, agent, action, beliefs) == pytest.approx(
            brute, abs=1e-12
        )


def test_dense_table_matches_utility(rng):
    game = TargetAssignmentGame(rng.uniform(0.5, 1.5, size=(3, 3)))
    dense = game.to_normal_form()
    assert np.array_equal(
        dense.utilities, NormalFormGame.from_function(3, 3, game.utility).utilities
    )

    for profile in dense.profiles():
        for i in range(3):
            assert dense.payoff(i, profile) == ta_utility(game, i, profile)

    with pytest.raises(GuardError):
        game.to_normal_form(guard=10)


def test_equal_distance_game_is_potential():
    game = TargetAssignmentGame.equal(3, 3, d=2.0)
    assert check_potential(game.to_normal_form())

    for profile in game.to_normal_form().profiles():
        pure = np.eye(3)[list(profile)]
        assert game.expected_potential(pure) == pytest.approx(ta_potential(game, profile))


def test_coverage_potential_needs_equal_distances():
    game = TargetAssignmentGame(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValueError):
        game.expected_potential(np.full((2, 2), 0.5))
    with pytest.raises(ValueError):
        ta_potential(game, (0, 1))


def test_oracle_clamps_steps_to_the_track():
    game = TargetAssignmentGame(np.ones((2, 2)))
    track = np.stack([np.full((2, 2), float(s)) for s in (1, 2, 3)])
    oracle = TargetOracle(game, track)

    assert oracle.distances_at(0)[0, 0] == 1.0
    assert oracle.distances_at(2)[0, 0] == 2.0
    assert oracle.distances_at(10)[0, 0] == 3.0
    assert oracle.distances_at(None)[0, 0] == 3.0

    beliefs = np.array([[1.0, 0.0], [0.25, 0.75]])
    assert oracle.payoffs(0, beliefs, 1).tolist() == [0.75, 0.25]
    assert oracle.payoffs(0, beliefs, 2).tolist() == [0.375, 0.125]

    with pytest.raises(ShapeError):
        TargetOracle(game, np.ones((3, 2, 3)))


def test_signals_stop_at_the_cutoff(rng):
    agents, targets = default_geometry(4, 5, rng)
    estimate = estimate_targets(SignalModel(0.2, 10), agents, targets, horizon=6, rng=rng)

    assert estimate.track.shape == (6, 4, 5)
    assert estimate.estimates.shape == (4, 5, 2)
    assert estimate_targets(SignalModel(0.2, 3), agents, targets, 50).track.shape == (3, 4, 5)


def test_noiseless_signals_give_exact_distances(rng):
    agents, targets = default_geometry(3, 4, rng)
    estimate = estimate_targets(SignalModel(0.0, 5), agents, targets, 20, rng)
    exact = TargetAssignmentGame.from_geometry(agents, targets)

    assert np.allclose(estimate.distances, exact.distances)
    assert np.allclose(estimate.track, exact.distances[np.newaxis])


def test_signal_model_validation():
    with pytest.raises(ValueError):
        SignalModel(-0.1)
    with pytest.raises(ValueError):
        SignalModel(0.1, 0)
    with pytest.raises(ValueError):
        estimate_targets(SignalModel(), np.zeros((1, 2)), np.ones((1, 2)), 0)


def test_default_geometry_places_targets_on_a_circle(rng):
    agents, targets = default_geometry(5, 6, rng, radius=1.0)
    assert agents.shape == (5, 2)
    assert np.allclose(np.linalg.norm(targets, axis=1), 1.0)


def test_one_to_one_profiles():
    profiles = list(one_to_one_profiles(2, 4))
    assert len(profiles) == 12
    assert all(a != b for a, b in profiles)


def test_equal_targets_equilibria_are_the_assignments():
    game = TargetAssignmentGame.equal(3, 3, d=1.5)
    assert sorted(enumerate_pure_ne(game.to_normal_form())) == sorted(one_to_one_profiles(3, 3))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6), k=st.integers(3, 4))
def test_noisy_targets_keep_the_same_equilibria(seed, k):
    distances = np.random.default_rng(seed).uniform(0.2, 3.0, size=(3, k))
    game = TargetAssignmentGame(distances)
    assert sorted(enumerate_pure_ne(game.to_normal_form())) == sorted(one_to_one_profiles(3, k))
