"""Potential functions, the maximum pairwise difference between games, and the
least-squares search for a nearby potential game.
"""

from typing import Iterator, Optional, Tuple

import numpy as np
from scipy.sparse.linalg import LinearOperator, lsqr

from ..exc import GuardError, ShapeError
from ..util import newLogger
from . import NormalFormGame


LSQ_GUARD: int = 4096
POTENTIAL_TOL: float = 1e-9

log = newLogger("dfplay.potential")


class PotentialCertificate:
    """Outcome of testing a game against the potential-game identity.

    ``max_residual`` is the largest absolute violation of
        ``u(a'_i, a_{-i}) - u(a) = u_i(a'_i, a_{-i}) - u_i(a)``
    over every agent, deviation and profile.
    """

    __slots__ = (
        "is_potential",
        "potential",
        "max_residual",
        "tol",
    )

    def __init__(
        self,
        is_potential: bool,
        potential: Optional[np.ndarray],
        max_residual: float,
        tol: float = POTENTIAL_TOL,
    ):
        if is_potential and (potential is None or max_residual > tol):
            raise ValueError("A positive certificate needs a potential within tol.")

        self.is_potential: bool = is_potential
        self.potential: Optional[np.ndarray] = potential
        self.max_residual: float = max_residual
        self.tol: float = tol

    def __bool__(self) -> bool:
        return self.is_potential

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "is_potential", self.is_potential
        yield "max_residual", self.max_residual
        yield "tol", self.tol

    def __repr__(self) -> str:
        return repr(dict(self))


def _deviation_spread(diff: np.ndarray) -> float:
    """Largest ``|D_i(a'_i, a_{-i}) - D_i(a)|`` over i, a'_i and a, for a stack
        ``D`` of per-agent tables. Equals the range of ``D_i`` along axis i.
    """
    return max(
        (float(np.ptp(diff[i], axis=i).max()) for i in range(diff.shape[0])),
        default=0.0,
    )


def path_potential(game: NormalFormGame) -> np.ndarray:
    """Integrate unilateral utility changes along coordinate paths.

    From the base profile (0, ..., 0), agents switch to their entries of ``a``
    one at a time in index order; ``u(a)`` is the sum of the switching agents'
    utility changes. The result is a potential whenever one exists.
    """
    n = game.n_agents
    idx = np.indices(game.shape).reshape(n, -1)
    values = np.zeros(idx.shape[1])

    for i in range(n):
        after = idx.copy()
        after[i + 1 :] = 0
        before = after.copy()
        before[i] = 0
        table = game.table(i)
        values += table[tuple(after)] - table[tuple(before)]

    return values.reshape(game.shape)


def potential_residual(game: NormalFormGame, potential: np.ndarray) -> float:
    if potential.shape != game.shape:
        raise ShapeError(f"Potential of shape {potential.shape} for {game!r}.")
    return _deviation_spread(game.utilities - potential[np.newaxis])


def check_potential(game: NormalFormGame, tol: float = POTENTIAL_TOL) -> PotentialCertificate:
    potential = path_potential(game)
    residual = potential_residual(game, potential)
    ok = residual <= tol
    return PotentialCertificate(ok, potential if ok else None, residual, tol)


def potential_game(potential: np.ndarray) -> NormalFormGame:
    """The identical-interest game whose every agent's utility is ``potential``."""
    n = potential.ndim
    return NormalFormGame(np.broadcast_to(potential, (n,) + potential.shape))


def mpd(g1: NormalFormGame, g2: NormalFormGame) -> float:
    """Maximum pairwise difference: the largest gap between the two games'
        unilateral utility changes, over every (i, a'_i, a).
    """
    if g1.utilities.shape != g2.utilities.shape:
        raise ShapeError(f"Cannot compare {g1!r} with {g2!r}.")
    return _deviation_spread(g1.utilities - g2.utilities)


def nearest_potential_lsq(
    game: NormalFormGame, guard: int = LSQ_GUARD, tol: float = POTENTIAL_TOL
) -> Tuple[NormalFormGame, PotentialCertificate, float]:
    """Least-squares surrogate for the closest potential game.

    Minimises the sum over all (i, a'_i, a) of squared differences between
    ``d_(a'_i, a)`` and the potential's change. Each agent's term only sees the
    table centred along its own axis, so the problem is the stacked system
    ``C_i u = C_i u_i`` with ``C_i`` the centring projection on axis i, solved
    by LSQR. Squared error is not the max-norm MPD; the achieved MPD is
    returned alongside.

    :return: The induced potential game, its certificate, and the MPD to it.
    """
    if game.n_profiles > guard:
        raise GuardError("nearest_potential_lsq", game.n_profiles, guard)

    n = game.n_agents
    shape = game.shape
    size = game.n_profiles

    def centre(values: np.ndarray, axis: int) -> np.ndarray:
        return values - values.mean(axis=axis, keepdims=True)

    def matvec(u: np.ndarray) -> np.ndarray:
        u = np.asarray(u).reshape(shape)
        return np.concatenate([centre(u, i).ravel() for i in range(n)])

    def rmatvec(y: np.ndarray) -> np.ndarray:
        blocks = np.asarray(y).reshape(n, *shape)
        return sum(centre(blocks[i], i) for i in range(n)).ravel()

    op = LinearOperator((n * size, size), matvec=matvec, rmatvec=rmatvec, dtype=float)
    rhs = np.concatenate([centre(game.table(i), i).ravel() for i in range(n)])

    solution, stop, iters = lsqr(
        op, rhs, atol=1e-15, btol=1e-15, iter_lim=max(100, 20 * size)
    )[:3]
    log.debug(f"LSQR stopped with code {stop} after {iters} iterations.")

    potential = solution.reshape(shape)
    potential = potential - potential.flat[0]

    nearest = potential_game(potential)
    return nearest, check_potential(nearest, tol), mpd(game, nearest)
