import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dfplay.exc import GuardError
from dfplay.games import (
    identity_coordination,
    perturb_potential_game,
    ta_potential,
    TargetAssignmentGame,
)
from dfplay.normal_form import NormalFormGame
from dfplay.normal_form.potential import (
    check_potential,
    mpd,
    nearest_potential_lsq,
    path_potential,
    PotentialCertificate,
    potential_game,
    potential_residual,
)


def test_coordination_is_potential(coordination):
    cert = check_potential(coordination)
    assert cert
    assert cert.max_residual <= 1e-12
    # The path sums start from profile (0, 0).
    assert cert.potential.tolist() == [[0.0, -1.0], [-1.0, 0.0]]


def test_pennies_is_not_potential(pennies):
    cert = check_potential(pennies)
    assert not cert
    assert cert.potential is None
    assert cert.max_residual > 1


def test_certificate_refuses_inconsistent_claims():
    with pytest.raises(ValueError):
        PotentialCertificate(True, None, 0.0)


def test_coverage_potential_of_equal_target_game():
    game = TargetAssignmentGame.equal(3, 3, d=2.0)
    table = game.potential_table()

    assert potential_residual(game.to_normal_form(), table) <= 1e-9
    assert check_potential(game.to_normal_form()).max_residual <= 1e-9
    assert table[0, 1, 2] == pytest.approx(1.5)
    assert table[1, 1, 1] == pytest.approx(0.5)


def test_mpd_of_a_game_to_itself(coordination, pennies):
    assert mpd(coordination, coordination) == 0.0
    assert mpd(pennies, coordination) == mpd(coordination, pennies)


def test_mpd_of_constant_shift(coordination):
    shifted = coordination.replace(coordination.utilities + 3.0)
    assert mpd(shifted, coordination) == pytest.approx(0.0)


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 10 ** 6),
    delta=st.floats(0.0, 0.5),
    n=st.integers(2, 3),
    k=st.integers(2, 3),
)
def test_perturbation_stays_within_delta(seed, delta, n, k):
    base = identity_coordination(k, n)
    game, actual = perturb_potential_game(base, delta, seed)
    assert actual <= delta + 1e-12
    assert mpd(game, base) == actual


def test_perturbation_needs_a_potential_base(pennies):
    with pytest.raises(ValueError):
        perturb_potential_game(pennies, 0.1)


def test_lsq_recovers_an_exact_potential(coordination):
    nearest, cert, delta = nearest_potential_lsq(coordination)
    assert cert
    assert delta <= 1e-6


def test_lsq_surrogate_is_a_potential_game(pennies):
    nearest, cert, delta = nearest_potential_lsq(pennies)
    assert cert
    assert check_potential(nearest)
    assert delta > 0


def test_lsq_size_guard(coordination):
    with pytest.raises(GuardError) as info:
        nearest_potential_lsq(coordination, guard=2)
    assert info.value.operation == "nearest_potential_lsq"
    assert info.value.limit == 2


def test_potential_game_shares_one_table():
    table = np.arange(8.0).reshape(2, 2, 2)
    game = potential_game(table)

    assert isinstance(game, NormalFormGame)
    assert game.n_agents == 3
    assert potential_residual(game, path_potential(game)) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10 ** 6), k=st.integers(2, 3))
def test_mpd_is_symmetric_and_obeys_the_triangle_inequality(seed, k):
    rng = np.random.default_rng(seed)
    a, b, c = (NormalFormGame(rng.normal(size=(2, k, k))) for _ in range(3))

    assert mpd(a, b) == mpd(b, a)
    assert mpd(a, a) == 0.0
    assert mpd(a, c) <= mpd(a, b) + mpd(b, c) + 1e-12


def test_lsq_surrogate_of_a_lopsided_coordination(coordination):
    utilities = coordination.utilities.copy()
    utilities[0, 1, 1] = 1.2
    game = NormalFormGame(utilities)

    nearest, cert, delta = nearest_potential_lsq(game)
    assert cert
    assert delta <= 0.2
    assert delta == pytest.approx(mpd(game, nearest))


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(1, 4),
    extra=st.integers(0, 3),
    d=st.floats(0.25, 4.0),
)
def test_coverage_potential_tracks_every_deviation(n, extra, d):
    k = min(n + extra, 4)
    game = TargetAssignmentGame.equal(n, k, d=d)
    dense = game.to_normal_form()

    for profile in dense.profiles():
        for i in range(n):
            for alt in range(k):
                moved = profile[:i] + (alt,) + profile[i + 1:]
                gain = dense.payoff(i, moved) - dense.payoff(i, profile)
                change = ta_potential(game, moved) - ta_potential(game, profile)
                assert gain == pytest.approx(change, abs=1e-12)
