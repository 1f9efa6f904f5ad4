"""Module defining concrete games: identity coordination, matching pennies,
the target-assignment game with noisy target estimates, and controlled
perturbations of potential games.
"""

from itertools import permutations
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from .exc import GuardError, ShapeError
from .normal_form import as_matrix, NormalFormGame, Profile
from .normal_form.fileio import GameFile
from .normal_form.potential import check_potential, mpd
from .util import newLogger


DISTANCE_FLOOR: float = 1e-6
DENSE_GUARD: int = 10 ** 6

log = newLogger("dfplay.games")


def identity_coordination(n_actions: int = 2, n_agents: int = 2) -> NormalFormGame:
    """Every agent gets 1 when all agents pick the same action, else 0."""
    shape = (n_actions,) * n_agents
    table = np.zeros(shape)
    for k in range(n_actions):
        table[(k,) * n_agents] = 1.0
    return NormalFormGame(np.broadcast_to(table, (n_agents,) + shape))


def matching_pennies() -> NormalFormGame:
    """Agent 0 wins 1 on a match, agent 1 wins 1 on a mismatch."""
    match = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return NormalFormGame(np.stack([match, -match]))


def coordination_file(n_actions: int = 2) -> GameFile:
    """Two-agent identity coordination with its uniform mixed equilibrium."""
    return GameFile(
        identity_coordination(n_actions, 2),
        name="coordination",
        mixed_equilibria=[np.full((2, n_actions), 1 / n_actions)],
    )


class TargetAssignmentGame:
    """N agents each choose one of K targets. An agent alone on target k earns
        ``1 / d[i, k]``; any agent sharing its target earns 0.

    :param distances: ``(N, K)`` array of positive agent-to-target distances.
    :param equal_distance: When set, every distance equals this value and the
        game has the coverage potential.
    """

    __slots__ = (
        "n_agents",
        "n_targets",
        "distances",
        "agent_positions",
        "target_positions",
        "equal_distance",
    )

    def __init__(
        self,
        distances: np.ndarray,
        agent_positions: np.ndarray = None,
        target_positions: np.ndarray = None,
        equal_distance: float = None,
    ):
        distances = np.array(distances, dtype=float)
        if distances.ndim != 2:
            raise ShapeError(f"Distances must be (N, K), got {distances.shape}.")
        if not np.all(distances > 0):
            raise ValueError("Every distance must be strictly positive.")
        if equal_distance is not None and not np.all(distances == equal_distance):
            raise ValueError("Equal-distance mode needs every distance equal.")

        distances.flags.writeable = False
        self.n_agents: int = distances.shape[0]
        self.n_targets: int = distances.shape[1]
        self.distances: np.ndarray = distances
        self.agent_positions: Optional[np.ndarray] = agent_positions
        self.target_positions: Optional[np.ndarray] = target_positions
        self.equal_distance: Optional[float] = equal_distance

    @classmethod
    def equal(cls, n_agents: int, n_targets: int, d: float = 1.0) -> "TargetAssignmentGame":
        if d <= 0:
            raise ValueError(f"Common distance {d} must be positive.")
        return cls(np.full((n_agents, n_targets), float(d)), equal_distance=float(d))

    @classmethod
    def from_geometry(
        cls, agent_positions: np.ndarray, target_positions: np.ndarray
    ) -> "TargetAssignmentGame":
        agents = np.asarray(agent_positions, dtype=float)
        targets = np.asarray(target_positions, dtype=float)
        dist = np.linalg.norm(agents[:, np.newaxis] - targets[np.newaxis], axis=2)
        return cls(np.maximum(dist, DISTANCE_FLOOR), agents, targets)

    @property
    def n_actions(self) -> int:
        return self.n_targets

    def utility(self, agent: int, profile: Sequence[int]) -> float:
        return ta_utility(self, agent, profile)

    def payoffs(
        self, agent: int, beliefs: np.ndarray, t: Optional[int] = None
    ) -> np.ndarray:
        return _conflict_free(agent, beliefs) / self.distances[agent]

    def potential(self, profile: Sequence[int]) -> float:
        return ta_potential(self, profile)

    def expected_potential(self, profile) -> float:
        """Coverage potential at a mixed profile:
            ``Σ_k (1 - Π_j (1 - f_j(k))) / d``.
        """
        self._require_equal()
        matrix = as_matrix(profile, self.n_agents, self.n_targets)
        covered = 1 - np.prod(1 - matrix, axis=0)
        return float(covered.sum() / self.equal_distance)

    def to_normal_form(self, guard: int = DENSE_GUARD) -> NormalFormGame:
        size = self.n_targets ** self.n_agents
        if size > guard:
            raise GuardError("to_normal_form", size, guard)

        n = self.n_agents
        idx = np.indices((self.n_targets,) * n)
        utilities = np.empty((n,) + idx.shape[1:])
        for i in range(n):
            shared = np.zeros(idx.shape[1:], dtype=bool)
            for j in range(n):
                if j != i:
                    shared |= idx[j] == idx[i]
            utilities[i] = np.where(shared, 0.0, 1 / self.distances[i][idx[i]])
        return NormalFormGame(utilities)

    def potential_table(self, guard: int = DENSE_GUARD) -> np.ndarray:
        self._require_equal()
        size = self.n_targets ** self.n_agents
        if size > guard:
            raise GuardError("potential_table", size, guard)

        idx = np.indices((self.n_targets,) * self.n_agents)
        hits = np.stack([(idx == k).any(axis=0) for k in range(self.n_targets)])
        return hits.sum(axis=0) / self.equal_distance

    def _require_equal(self):
        if self.equal_distance is None:
            raise ValueError("The coverage potential exists only with equal distances.")

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "n_agents", self.n_agents
        yield "n_targets", self.n_targets
        yield "distances", self.distances.tolist()
        if self.equal_distance is not None:
            yield "equal_distance", self.equal_distance
        if self.agent_positions is not None:
            yield "agent_positions", np.asarray(self.agent_positions).tolist()
        if self.target_positions is not None:
            yield "target_positions", np.asarray(self.target_positions).tolist()

    def __repr__(self) -> str:
        return f"TargetAssignmentGame(N={self.n_agents}, K={self.n_targets})"


def _conflict_free(agent: int, beliefs: np.ndarray) -> np.ndarray:
    """Probability, per target, that no other agent picks it."""
    others = np.delete(np.asarray(beliefs, dtype=float), agent, axis=0)
    return np.prod(1 - others, axis=0)


def ta_utility(game: TargetAssignmentGame, agent: int, profile: Sequence[int]) -> float:
    if len(profile) != game.n_agents:
        raise ShapeError(f"Profile {tuple(profile)} does not cover {game.n_agents} agents.")
    k = profile[agent]
    if any(profile[j] == k for j in range(game.n_agents) if j != agent):
        return 0.0
    return float(1 / game.distances[agent, k])


def ta_expected_utility(
    game: TargetAssignmentGame, agent: int, action: int, beliefs: np.ndarray
) -> float:
    """``Π_{j != agent} (1 - beliefs[j, action]) / d[agent, action]``."""
    beliefs = as_matrix(beliefs, game.n_agents, game.n_targets)
    return float(game.payoffs(agent, beliefs)[action])


def ta_potential(game: TargetAssignmentGame, profile: Sequence[int]) -> float:
    """Number of covered targets over the common distance."""
    game._require_equal()
    return len(set(profile)) / game.equal_distance


class TargetOracle:
    """Expected utilities of a target-assignment game whose distances change
        over the first steps of play.

    ``track[s]`` holds the distances agents use at step ``s + 1``; steps past
    the end of the track use its last entry.
    """

    __slots__ = (
        "game",
        "track",
    )

    def __init__(self, game: TargetAssignmentGame, track: np.ndarray = None):
        if track is None:
            track = game.distances[np.newaxis]
        track = np.array(track, dtype=float)
        if track.ndim != 3 or track.shape[1:] != game.distances.shape:
            raise ShapeError(f"Distance track of shape {track.shape} for {game!r}.")
        track.flags.writeable = False

        self.game: TargetAssignmentGame = game
        self.track: np.ndarray = track

    @property
    def n_agents(self) -> int:
        return self.game.n_agents

    @property
    def n_actions(self) -> int:
        return self.game.n_targets

    def distances_at(self, t: Optional[int]) -> np.ndarray:
        if t is None:
            return self.track[-1]
        return self.track[min(max(t, 1), len(self.track)) - 1]

    def payoffs(
        self, agent: int, beliefs: np.ndarray, t: Optional[int] = None
    ) -> np.ndarray:
        return _conflict_free(agent, beliefs) / self.distances_at(t)[agent]


class SignalModel:
    """Private noisy signals of target positions.

    :param float noise_std: Standard deviation of each signal coordinate.
    :param int signal_cutoff: Signals stop arriving after this many steps.
    """

    __slots__ = (
        "noise_std",
        "signal_cutoff",
        "seed",
    )

    def __init__(self, noise_std: float = 0.1, signal_cutoff: int = 10, seed: int = 0):
        if noise_std < 0:
            raise ValueError(f"Noise std {noise_std} is negative.")
        if signal_cutoff < 1:
            raise ValueError(f"Signal cutoff {signal_cutoff} is below 1.")

        self.noise_std: float = float(noise_std)
        self.signal_cutoff: int = int(signal_cutoff)
        self.seed: int = seed

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "noise_std", self.noise_std
        yield "signal_cutoff", self.signal_cutoff
        yield "seed", self.seed


class TargetEstimate:
    """Per-agent running estimates of every target and the distances to them.

    ``estimates`` is ``(N, K, 2)`` after the last signal, ``distances`` the
    matching ``(N, K)`` array, and ``track`` the distances after each signal.
    """

    __slots__ = (
        "estimates",
        "distances",
        "track",
    )

    def __init__(self, estimates: np.ndarray, track: np.ndarray):
        self.estimates: np.ndarray = estimates
        self.track: np.ndarray = track
        self.distances: np.ndarray = track[-1]


def estimate_targets(
    model: SignalModel,
    agent_positions: np.ndarray,
    target_positions: np.ndarray,
    horizon: int,
    rng: np.random.Generator = None,
) -> TargetEstimate:
    """Sample-average ``min(signal_cutoff, horizon)`` Gaussian signals per agent
        and target. Distances below ``DISTANCE_FLOOR`` are clamped.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if rng is None:
        rng = np.random.default_rng(model.seed)

    agents = np.asarray(agent_positions, dtype=float)
    targets = np.asarray(target_positions, dtype=float)
    steps = min(model.signal_cutoff, horizon)
    n, k = agents.shape[0], targets.shape[0]

    noise = rng.normal(0.0, 1.0, size=(steps, n, k, 2)) * model.noise_std
    signals = targets[np.newaxis, np.newaxis] + noise
    counts = np.arange(1, steps + 1)[:, np.newaxis, np.newaxis, np.newaxis]
    means = np.cumsum(signals, axis=0) / counts

    track = np.linalg.norm(means - agents[np.newaxis, :, np.newaxis], axis=3)
    track = np.maximum(track, DISTANCE_FLOOR)
    log.debug(f"Estimated {k} targets for {n} agents from {steps} signals each.")
    return TargetEstimate(means[-1], track)


def default_geometry(
    n_agents: int,
    n_targets: int,
    rng: np.random.Generator,
    agent_std: float = 0.1,
    radius: float = 1.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """Agents scattered normally around the origin, targets evenly spaced on a
        circle.
    """
    agents = rng.normal(0.0, agent_std, size=(n_agents, 2))
    angles = 2 * np.pi * np.arange(n_targets) / n_targets
    targets = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    return agents, targets


def perturb_potential_game(
    base: NormalFormGame, delta: float, seed=0
) -> Tuple[NormalFormGame, float]:
    """Add i.i.d. ``U(-delta/4, delta/4)`` noise to every utility entry.

    Each unilateral change involves two entries per game, so the result is
    within MPD ``delta`` of ``base``.

    :return: The perturbed game and its actual MPD to ``base``.
    """
    if delta < 0:
        raise ValueError(f"delta {delta} is negative.")
    cert = check_potential(base)
    if not cert:
        raise ValueError(
            f"Base game is not a potential game (residual {cert.max_residual:.3g})."
        )

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    noise = rng.uniform(-delta / 4, delta / 4, size=base.utilities.shape)
    game = base.replace(base.utilities + noise)
    return game, mpd(game, base)


def one_to_one_profiles(n_agents: int, n_targets: int) -> Iterator[Profile]:
    """Every assignment of distinct targets to agents."""
    return permutations(range(n_targets), n_agents)


__all__ = (
    "coordination_file",
    "default_geometry",
    "estimate_targets",
    "identity_coordination",
    "matching_pennies",
    "one_to_one_profiles",
    "perturb_potential_game",
    "SignalModel",
    "ta_expected_utility",
    "ta_potential",
    "ta_utility",
    "TargetAssignmentGame",
    "TargetEstimate",
    "TargetOracle",
)
