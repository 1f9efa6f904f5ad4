"""Package defining the reference equilibrium sets that trajectories are
measured against, the per-step distance metrics, and basin tracking.

Every distance between profiles is the Euclidean norm of the concatenated
per-agent vectors.
"""

from math import perm, sqrt
from typing import Hashable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..engine import Trajectory
from ..exc import GuardError
from ..games import one_to_one_profiles
from ..normal_form import as_matrix, enumerate_pure_ne, NormalFormGame, Profile
from ..normal_form.fileio import GameFile


POINTS_GUARD: int = 4096

Label = Hashable


class EquilibriumAtlas:
    """An explicit list of pure equilibria, plus any known mixed ones.

    Mixed equilibria take part in nearest-point queries but not in ``size`` or
    ``d_star``, which count pure equilibria only.
    """

    __slots__ = (
        "n_agents",
        "n_actions",
        "profiles",
        "mixed",
        "points",
    )

    def __init__(
        self,
        profiles: Sequence[Profile],
        n_agents: int,
        n_actions: int,
        mixed: Sequence[np.ndarray] = (),
    ):
        self.n_agents: int = n_agents
        self.n_actions: int = n_actions
        self.profiles: List[Profile] = [tuple(int(a) for a in p) for p in profiles]
        self.mixed: List[np.ndarray] = [
            as_matrix(m, n_agents, n_actions) for m in mixed
        ]

        eye = np.eye(n_actions)
        pts = [eye[list(p)].ravel() for p in self.profiles]
        pts += [m.ravel() for m in self.mixed]
        self.points: np.ndarray = (
            np.vstack(pts) if pts else np.zeros((0, n_agents * n_actions))
        )

    @classmethod
    def from_game(
        cls, game: NormalFormGame, mixed: Sequence[np.ndarray] = ()
    ) -> "EquilibriumAtlas":
        return cls(enumerate_pure_ne(game), game.n_agents, game.n_actions, mixed)

    @classmethod
    def from_file(cls, game_file: GameFile) -> "EquilibriumAtlas":
        return cls.from_game(game_file.game, game_file.mixed_equilibria)

    @property
    def size(self) -> int:
        return len(self.profiles)

    @property
    def labels(self) -> List[Label]:
        return self.profiles + [("mixed", m) for m in range(len(self.mixed))]

    @property
    def d_star(self) -> Optional[float]:
        """Smallest distance between two distinct pure equilibria."""
        if self.size < 2:
            return None
        pure = np.array(self.profiles)
        differ = (pure[:, np.newaxis] != pure[np.newaxis]).sum(axis=2)
        return sqrt(2 * differ[~np.eye(self.size, dtype=bool)].min())

    def distances(self, profile) -> np.ndarray:
        flat = as_matrix(profile, self.n_agents, self.n_actions).ravel()
        return np.linalg.norm(self.points - flat, axis=1)

    def nearest(self, profile) -> Tuple[np.ndarray, Label, float]:
        """The closest reference point as an ``(N, K)`` matrix, its label, and
            the distance to it.
        """
        if not len(self.points):
            raise ValueError("The equilibrium atlas is empty.")
        dist = self.distances(profile)
        m = int(np.argmin(dist))
        point = self.points[m].reshape(self.n_agents, self.n_actions)
        return point, self.labels[m], float(dist[m])

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "size", self.size
        yield "d_star", self.d_star
        yield "pure", [list(p) for p in self.profiles]
        if self.mixed:
            yield "mixed", [m.tolist() for m in self.mixed]


class AssignmentAtlas:
    """The one-to-one assignments of N agents to K >= N targets, never
        enumerated: the nearest one solves a linear assignment problem.
    """

    __slots__ = (
        "n_agents",
        "n_actions",
    )

    def __init__(self, n_agents: int, n_targets: int):
        if n_agents > n_targets:
            raise ValueError(
                f"No one-to-one assignment of {n_agents} agents to {n_targets} targets."
            )
        self.n_agents: int = n_agents
        self.n_actions: int = n_targets

    @property
    def size(self) -> int:
        return perm(self.n_actions, self.n_agents)

    @property
    def d_star(self) -> Optional[float]:
        if self.size < 2:
            return None
        return 2.0 if self.n_agents == self.n_actions else sqrt(2)

    @property
    def points(self) -> np.ndarray:
        if self.size > POINTS_GUARD:
            raise GuardError("AssignmentAtlas.points", self.size, POINTS_GUARD)
        eye = np.eye(self.n_actions)
        return np.vstack(
            [eye[list(p)].ravel() for p in one_to_one_profiles(self.n_agents, self.n_actions)]
        )

    def nearest(self, profile) -> Tuple[np.ndarray, Label, float]:
        matrix = as_matrix(profile, self.n_agents, self.n_actions)
        rows, cols = linear_sum_assignment(matrix, maximize=True)
        point = np.zeros_like(matrix)
        point[rows, cols] = 1.0
        return point, tuple(int(c) for c in cols), float(np.linalg.norm(matrix - point))

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "size", self.size
        yield "d_star", self.d_star
        yield "kind", "one-to-one assignments"


def profile_metrics(matrix: np.ndarray, atlas) -> Tuple[float, Label]:
    """``(1/N) Σ_i ||f_i - σ*_i||`` against the nearest reference point, and
        that point's label.
    """
    point, label, _ = atlas.nearest(matrix)
    return float(np.linalg.norm(matrix - point, axis=1).mean()), label


def fig1_metrics(trajectory: Trajectory, atlas) -> Tuple[np.ndarray, np.ndarray]:
    """Per-step average distance to the nearest equilibrium, and average
        belief error over ordered pairs of distinct agents.
    """
    distance = np.array(
        [profile_metrics(f, atlas)[0] for f in trajectory.frequencies]
    )
    return distance, trajectory.belief_error.copy()


class BasinReport:
    """Nearest-equilibrium labels at steps inside the approximate set (None
        elsewhere), every step where the label changed, and the verdict.
    """

    __slots__ = (
        "labels",
        "switches",
        "final_entry",
        "verdict",
    )

    def __init__(
        self,
        labels: List[Optional[Label]],
        switches: List[int],
        final_entry: Optional[int],
        verdict: Optional[Label],
    ):
        self.labels: List[Optional[Label]] = labels
        self.switches: List[int] = switches
        self.final_entry: Optional[int] = final_entry
        self.verdict: Optional[Label] = verdict

    @property
    def switches_after_entry(self) -> List[int]:
        if self.final_entry is None:
            return []
        return [t for t in self.switches if t > self.final_entry]

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "verdict", _jsonable(self.verdict)
        yield "final_entry", self.final_entry
        yield "switches", self.switches


def _jsonable(label):
    if isinstance(label, tuple):
        return [_jsonable(x) for x in label]
    return label


def basin_tracker(trajectory: Trajectory, atlas, eps_threshold: float) -> BasinReport:
    """Label each step whose regret is within ``eps_threshold``.

    The verdict is the single label held through the final stretch of steps
    inside the set; it is None if that stretch changes label, or if the
    trajectory ends outside the set.
    """
    inside = trajectory.max_regret <= eps_threshold
    labels: List[Optional[Label]] = [
        atlas.nearest(f)[1] if ok else None
        for f, ok in zip(trajectory.frequencies, inside)
    ]

    switches = []
    previous = None
    for t, label in enumerate(labels, start=1):
        if label is None:
            continue
        if previous is not None and label != previous:
            switches.append(t)
        previous = label

    if not len(labels) or not inside[-1]:
        return BasinReport(labels, switches, None, None)

    outside = np.flatnonzero(~inside)
    final_entry = int(outside[-1]) + 2 if outside.size else 1
    held = {labels[t - 1] for t in range(final_entry, len(labels) + 1)}
    verdict = held.pop() if len(held) == 1 else None
    return BasinReport(labels, switches, final_entry, verdict)


__all__ = (
    "AssignmentAtlas",
    "basin_tracker",
    "BasinReport",
    "EquilibriumAtlas",
    "fig1_metrics",
    "profile_metrics",
)
