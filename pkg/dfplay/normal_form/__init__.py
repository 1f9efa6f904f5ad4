"""Package defining normal-form games and the algebra of mixed strategies.

Utility tables are dense numpy arrays of shape ``(N, K, ..., K)``: the first
axis selects the agent, and the remaining N axes index the joint pure profile
in row-major order, so agent 0 is the slowest axis. A flattened per-agent table
therefore lists profiles in the order ``itertools.product(range(K), repeat=N)``.
"""

from typing import (
    Callable,
    Iterator,
    List,
    Optional,
    Protocol,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from ..exc import GuardError, ShapeError


JSON_OPTS = {"separators": (",", ":")}

SIMPLEX_TOL: float = 1e-9
REGRET_TOL: float = 1e-9
NE_GUARD: int = 10 ** 7

Profile = Tuple[int, ...]
ProfileLike = Union["JointMixedProfile", np.ndarray, Sequence[Sequence[float]]]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class MixedStrategy:
    """A probability vector over the common action set."""

    __slots__ = ("probs",)

    def __init__(self, probs: Sequence[float], tol: float = SIMPLEX_TOL):
        probs = np.array(probs, dtype=float)

        if probs.ndim != 1 or probs.size == 0:
            raise ShapeError(f"Strategy must be a nonempty vector, got {probs.shape}.")
        if not np.all(np.isfinite(probs)) or probs.min() < 0:
            raise ValueError("Strategy entries must be finite and nonnegative.")
        if abs(probs.sum() - 1) > tol:
            raise ValueError(f"Strategy sums to {probs.sum()!r}, not 1.")

        self.probs: np.ndarray = _frozen(probs)

    @classmethod
    def pure(cls, action: int, n_actions: int) -> "MixedStrategy":
        if not 0 <= action < n_actions:
            raise IndexError(f"Action {action} outside 0..{n_actions - 1}.")
        return cls(np.eye(n_actions)[action])

    @classmethod
    def uniform(cls, n_actions: int) -> "MixedStrategy":
        return cls(np.full(n_actions, 1 / n_actions))

    @property
    def n_actions(self) -> int:
        return self.probs.size

    def __len__(self) -> int:
        return self.probs.size

    def __iter__(self) -> Iterator[float]:
        return iter(self.probs.tolist())

    def __repr__(self) -> str:
        return f"MixedStrategy({self.probs.tolist()})"


class JointMixedProfile:
    """One MixedStrategy per agent, stored as an ``(N, K)`` matrix."""

    __slots__ = ("matrix",)

    def __init__(self, strategies: Sequence[Union[MixedStrategy, Sequence[float]]]):
        rows = [
            s if isinstance(s, MixedStrategy) else MixedStrategy(s) for s in strategies
        ]
        if not rows:
            raise ShapeError("A joint profile needs at least one agent.")
        if len({len(r) for r in rows}) != 1:
            raise ShapeError("All agents must share one action set.")

        self.matrix: np.ndarray = _frozen(np.vstack([r.probs for r in rows]))

    @classmethod
    def pure(cls, profile: Sequence[int], n_actions: int) -> "JointMixedProfile":
        return cls([MixedStrategy.pure(a, n_actions) for a in profile])

    @classmethod
    def uniform(cls, n_agents: int, n_actions: int) -> "JointMixedProfile":
        return cls([MixedStrategy.uniform(n_actions)] * n_agents)

    @property
    def n_agents(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_actions(self) -> int:
        return self.matrix.shape[1]

    @property
    def strategies(self) -> List[MixedStrategy]:
        return [MixedStrategy(row) for row in self.matrix]

    @property
    def flat(self) -> np.ndarray:
        """The concatenated per-agent vector used for every profile distance."""
        return self.matrix.ravel()

    def __repr__(self) -> str:
        return f"JointMixedProfile({self.matrix.tolist()})"


def as_matrix(profile: ProfileLike, n_agents: int, n_actions: int) -> np.ndarray:
    """Return a profile as an ``(N, K)`` array, checking its shape."""
    matrix = (
        profile.matrix
        if isinstance(profile, JointMixedProfile)
        else np.asarray(profile, dtype=float)
    )
    if matrix.shape != (n_agents, n_actions):
        raise ShapeError(
            f"Profile has shape {matrix.shape}, expected {(n_agents, n_actions)}."
        )
    return matrix


class NormalFormGame:
    """N agents over a common set of K actions, with dense utility tables.

    :param utilities: Array of shape ``(N, K, ..., K)`` with N profile axes.
    """

    __slots__ = (
        "n_agents",
        "n_actions",
        "utilities",
    )

    def __init__(self, utilities: Union[np.ndarray, Sequence]):
        utilities = np.array(utilities, dtype=float)

        if utilities.ndim < 2:
            raise ShapeError("Utilities need an agent axis and profile axes.")
        n_agents = utilities.shape[0]
        n_actions = utilities.shape[1]

        if utilities.shape != (n_agents,) + (n_actions,) * n_agents:
            raise ShapeError(
                f"Utility array of shape {utilities.shape} does not cover"
                f" {n_actions}^{n_agents} profiles for each of {n_agents} agents."
            )
        if not np.all(np.isfinite(utilities)):
            raise ValueError("Every utility entry must be finite.")

        self.n_agents: int = n_agents
        self.n_actions: int = n_actions
        self.utilities: np.ndarray = _frozen(utilities)

    @classmethod
    def from_function(
        cls, n_agents: int, n_actions: int, func: Callable[[int, Profile], float]
    ) -> "NormalFormGame":
        shape = (n_actions,) * n_agents
        utilities = np.empty((n_agents,) + shape)
        for profile in np.ndindex(*shape):
            for agent in range(n_agents):
                utilities[(agent,) + profile] = func(agent, profile)
        return cls(utilities)

    @classmethod
    def from_dict(cls, data: dict) -> "NormalFormGame":
        """Build a game from the file layout: per-agent flat lists in row-major
            profile order.
        """
        try:
            n_agents = int(data["n_agents"])
            n_actions = int(data["n_actions"])
            flat = np.array(data["utilities"], dtype=float)
        except (KeyError, TypeError, ValueError) as e:
            raise ShapeError(f"Malformed game data: {e}") from e

        if n_agents < 1 or n_actions < 1:
            raise ShapeError("n_agents and n_actions must be positive.")
        if flat.shape != (n_agents, n_actions ** n_agents):
            raise ShapeError(
                f"Expected {n_agents} utility arrays of {n_actions ** n_agents}"
                f" entries, got shape {flat.shape}."
            )
        return cls(flat.reshape((n_agents,) + (n_actions,) * n_agents))

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n_actions,) * self.n_agents

    @property
    def n_profiles(self) -> int:
        return self.n_actions ** self.n_agents

    def table(self, agent: int) -> np.ndarray:
        return self.utilities[agent]

    def payoff(self, agent: int, profile: Sequence[int]) -> float:
        self.check_profile(profile)
        return float(self.utilities[(agent,) + tuple(profile)])

    def profiles(self) -> Iterator[Profile]:
        return np.ndindex(*self.shape)

    def check_profile(self, profile: Sequence[int]) -> None:
        if len(profile) != self.n_agents:
            raise ShapeError(
                f"Profile {tuple(profile)} has {len(profile)} entries, game has"
                f" {self.n_agents} agents."
            )
        for a in profile:
            if not 0 <= a < self.n_actions:
                raise IndexError(f"Action {a} outside 0..{self.n_actions - 1}.")

    def replace(self, utilities: np.ndarray) -> "NormalFormGame":
        return type(self)(utilities)

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "n_agents", self.n_agents
        yield "n_actions", self.n_actions
        yield "utilities", self.utilities.reshape(self.n_agents, -1).tolist()

    def __repr__(self) -> str:
        return f"NormalFormGame(N={self.n_agents}, K={self.n_actions})"


class GameOracle(Protocol):
    """Anything that can value each pure action of an agent against beliefs
        about everyone else.
    """

    n_agents: int
    n_actions: int

    def payoffs(
        self, agent: int, beliefs: np.ndarray, t: Optional[int] = None
    ) -> np.ndarray:
        """Return ``u_agent(k, beliefs_{-agent})`` for every action k. Row
            ``agent`` of the ``(N, K)`` beliefs array is ignored.
        """


def contract(table: np.ndarray, matrix: np.ndarray, keep: int = None) -> np.ndarray:
    """Contract every profile axis of a table against the matching row of a
        mixed profile, except axis ``keep`` if given.
    """
    n = table.ndim
    if keep is not None:
        table = np.moveaxis(table, keep, 0)
        order = [j for j in range(n) if j != keep]
        for j in reversed(order):
            table = table @ matrix[j]
        return table

    for j in reversed(range(n)):
        table = table @ matrix[j]
    return table


class TableOracle:
    """Expected utilities of a dense game by exact contraction."""

    __slots__ = ("game",)

    def __init__(self, game: NormalFormGame):
        self.game: NormalFormGame = game

    @property
    def n_agents(self) -> int:
        return self.game.n_agents

    @property
    def n_actions(self) -> int:
        return self.game.n_actions

    def payoffs(
        self, agent: int, beliefs: np.ndarray, t: Optional[int] = None
    ) -> np.ndarray:
        return contract(self.game.table(agent), beliefs, keep=agent)


def oracle_for(game: Union[NormalFormGame, GameOracle]) -> GameOracle:
    return TableOracle(game) if isinstance(game, NormalFormGame) else game


def expected_utility(game: NormalFormGame, agent: int, profile: ProfileLike) -> float:
    """Exact expected utility ``Σ_a u_agent(a) Π_j profile_j(a_j)``."""
    if not 0 <= agent < game.n_agents:
        raise IndexError(f"Agent {agent} outside 0..{game.n_agents - 1}.")
    matrix = as_matrix(profile, game.n_agents, game.n_actions)
    return float(contract(game.table(agent), matrix))


def expected_potential(potential: np.ndarray, profile: ProfileLike) -> float:
    """Multilinear extension of a potential table at a mixed profile."""
    n_agents = potential.ndim
    matrix = as_matrix(profile, n_agents, potential.shape[0])
    return float(contract(potential, matrix))


def unilateral_deviation(
    game: NormalFormGame, agent: int, alt_action: int, base: Sequence[int]
) -> float:
    """``u_i(a'_i, a_{-i}) - u_i(a_i, a_{-i})``."""
    if not 0 <= agent < game.n_agents:
        raise IndexError(f"Agent {agent} outside 0..{game.n_agents - 1}.")
    game.check_profile(base)
    if not 0 <= alt_action < game.n_actions:
        raise IndexError(f"Action {alt_action} outside 0..{game.n_actions - 1}.")

    moved = list(base)
    moved[agent] = alt_action
    return game.payoff(agent, moved) - game.payoff(agent, base)


def regret(
    game: Union[NormalFormGame, GameOracle], profile: ProfileLike, t: int = None
) -> Tuple[float, np.ndarray]:
    """Per-agent regrets ``max_k u_i(k, σ_{-i}) - u_i(σ_i, σ_{-i})`` and their
        maximum. Expected utility is linear in σ_i, so pure deviations suffice.
    """
    oracle = oracle_for(game)
    matrix = as_matrix(profile, oracle.n_agents, oracle.n_actions)

    per_agent = np.empty(oracle.n_agents)
    for i in range(oracle.n_agents):
        values = oracle.payoffs(i, matrix, t)
        per_agent[i] = max(values.max() - values @ matrix[i], 0.0)

    return float(per_agent.max()), per_agent


def enumerate_pure_ne(
    game: NormalFormGame, tol: float = REGRET_TOL, guard: int = NE_GUARD
) -> List[Profile]:
    """All pure profiles with zero regret, in row-major profile order."""
    if game.n_profiles > guard:
        raise GuardError("enumerate_pure_ne", game.n_profiles, guard)

    stable = np.ones(game.shape, dtype=bool)
    for i in range(game.n_agents):
        table = game.table(i)
        stable &= table >= table.max(axis=i, keepdims=True) - tol

    return [tuple(int(a) for a in p) for p in np.argwhere(stable)]


__all__ = (
    "as_matrix",
    "contract",
    "enumerate_pure_ne",
    "expected_potential",
    "expected_utility",
    "GameOracle",
    "JointMixedProfile",
    "JSON_OPTS",
    "MixedStrategy",
    "NormalFormGame",
    "oracle_for",
    "Profile",
    "regret",
    "TableOracle",
    "unilateral_deviation",
)
