from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dfplay.exc import GuardError, ShapeError
from dfplay.normal_form import (
    enumerate_pure_ne,
    expected_utility,
    JointMixedProfile,
    MixedStrategy,
    NormalFormGame,
    regret,
    TableOracle,
    unilateral_deviation,
)
from dfplay.normal_form.fileio import GameFile, load_game, save_game


def random_game(seed: int, n: int, k: int) -> NormalFormGame:
    rng = np.random.default_rng(seed)
    return NormalFormGame(rng.uniform(-1, 1, size=(n,) + (k,) * n))


def random_profile(seed: int, n: int, k: int) -> np.ndarray:
    return np.random.default_rng(seed + 1).dirichlet(np.ones(k), size=n)


def test_mixed_strategy_rejects_bad_vectors():
    with pytest.raises(ValueError):
        MixedStrategy([0.5, 0.6])
    with pytest.raises(ValueError):
        MixedStrategy([1.5, -0.5])
    with pytest.raises(ShapeError):
        MixedStrategy([])

    assert MixedStrategy.pure(1, 3).probs.tolist() == [0.0, 1.0, 0.0]
    assert MixedStrategy.uniform(4).probs.tolist() == [0.25] * 4


def test_joint_profile_flat_concatenates_agents():
    profile = JointMixedProfile([[1, 0], [0.25, 0.75]])
    assert profile.n_agents == 2
    assert profile.flat.tolist() == [1, 0, 0.25, 0.75]

    with pytest.raises(ShapeError):
        JointMixedProfile([[1, 0], [0.2, 0.3, 0.5]])


def test_game_shape_is_checked():
    with pytest.raises(ShapeError):
        NormalFormGame(np.zeros((2, 2, 3)))
    with pytest.raises(ShapeError):
        NormalFormGame.from_dict({"n_agents": 2, "n_actions": 2, "utilities": [[1, 2, 3]]})


def test_coordination_expected_utility(coordination):
    uniform = JointMixedProfile.uniform(2, 2)
    assert expected_utility(coordination, 0, uniform) == pytest.approx(0.5)
    assert expected_utility(coordination, 1, [[1, 0], [1, 0]]) == 1.0


def test_regret_of_miscoordination(coordination):
    worst, per_agent = regret(coordination, [[1, 0], [0, 1]])
    assert worst == 1.0
    assert per_agent.tolist() == [1.0, 1.0]
    assert regret(coordination, [[1, 0], [1, 0]])[0] == 0.0


def test_pure_equilibria(coordination, pennies):
    assert enumerate_pure_ne(coordination) == [(0, 0), (1, 1)]
    assert enumerate_pure_ne(pennies) == []

    with pytest.raises(GuardError) as info:
        enumerate_pure_ne(coordination, guard=2)
    assert info.value.size == 4


def test_unilateral_deviation(coordination):
    assert unilateral_deviation(coordination, 0, 1, (0, 0)) == -1.0
    assert unilateral_deviation(coordination, 1, 0, (0, 1)) == 1.0
    with pytest.raises(IndexError):
        unilateral_deviation(coordination, 0, 2, (0, 0))


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 10 ** 6),
    n=st.integers(1, 3),
    k=st.integers(1, 3),
)
def test_expected_utility_matches_enumeration(seed, n, k):
    game = random_game(seed, n, k)
    profile = random_profile(seed, n, k)

    for i in range(n):
        brute = sum(
            game.payoff(i, a) * np.prod([profile[j, a[j]] for j in range(n)])
            for a in product(range(k), repeat=n)
        )
        assert expected_utility(game, i, profile) == pytest.approx(brute, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(1, 3), k=st.integers(2, 3))
def test_regret_is_nonnegative_and_pure_deviations_suffice(seed, n, k):
    game = random_game(seed, n, k)
    profile = random_profile(seed, n, k)
    worst, per_agent = regret(game, profile)

    assert (per_agent >= 0).all()
    assert worst == per_agent.max()

    oracle = TableOracle(game)
    for i in range(n):
        values = oracle.payoffs(i, profile)
        for action in range(k):
            moved = profile.copy()
            moved[i] = np.eye(k)[action]
            assert expected_utility(game, i, moved) == pytest.approx(values[action], abs=1e-12)


def test_game_file_keeps_mixed_equilibria(tmp_path, coordination_game_file):
    path = save_game(coordination_game_file, tmp_path / "coordination.json")
    loaded = load_game(path)

    assert loaded.name == "coordination"
    assert np.array_equal(loaded.game.utilities, coordination_game_file.game.utilities)
    assert loaded.mixed_equilibria[0].tolist() == [[0.5, 0.5], [0.5, 0.5]]


def test_game_file_rejects_malformed_text():
    with pytest.raises(ShapeError):
        GameFile.decode("{not json")
    with pytest.raises(ShapeError):
        GameFile.decode("[1, 2]")
    with pytest.raises(ShapeError):
        GameFile.decode('{"n_agents": 2, "n_actions": 2}')


def test_game_file_wraps_bad_values():
    with pytest.raises(ShapeError):
        GameFile.decode('{"n_agents": 1, "n_actions": 2, "utilities": [[NaN, 1.0]]}')
    with pytest.raises(ShapeError):
        GameFile.decode(
            '{"n_agents": 1, "n_actions": 2, "utilities": [[0.0, 1.0]],'
            ' "mixed_equilibria": [[[0.5, 0.5], [1.0]]]}'
        )
