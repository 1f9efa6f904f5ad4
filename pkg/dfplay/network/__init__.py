"""Package defining time-varying communication graphs and belief averaging.

Time steps are 1-based, matching the play loop: the graph used for the
exchange closing step t is ``schedule.edges_at(t)``.
"""

from typing import FrozenSet, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from ..exc import ShapeError
from ..normal_form import SIMPLEX_TOL


Edge = Tuple[int, int]
EdgeSet = FrozenSet[Edge]

KINDS: FrozenSet[str] = frozenset(
    {"static", "ring", "star", "complete", "periodic", "random"}
)
RULES: FrozenSet[str] = frozenset({"uniform", "metropolis", "exact"})


def _normalise(edges, n_agents: int) -> EdgeSet:
    out = set()
    for i, j in edges:
        i, j = int(i), int(j)
        if i == j:
            raise ValueError(f"Self-loop at node {i}.")
        if not (0 <= i < n_agents and 0 <= j < n_agents):
            raise ValueError(f"Edge {(i, j)} leaves nodes 0..{n_agents - 1}.")
        out.add((min(i, j), max(i, j)))
    return frozenset(out)


class GraphSchedule:
    """A deterministic sequence of undirected edge sets over N agents.

    :param int n_agents: Number of nodes.
    :param str kind: ``static`` (explicit ``edges``), ``ring``, ``star`` (hub
        0), ``complete``, ``periodic`` (``edges`` is a list of edge lists,
        cycled), or ``random`` (Erdős–Rényi with probability ``p`` per step,
        seeded by ``(seed, t)``).
    """

    __slots__ = (
        "n_agents",
        "kind",
        "period",
        "seed",
        "p",
        "_phases",
    )

    def __init__(
        self,
        n_agents: int,
        kind: str = "ring",
        *,
        edges: Sequence = None,
        seed: int = 0,
        p: float = 0.5,
    ):
        if n_agents < 1:
            raise ValueError("A schedule needs at least one agent.")
        if kind not in KINDS:
            raise ValueError(f"Unknown schedule kind {kind!r}.")

        self.n_agents: int = n_agents
        self.kind: str = kind
        self.seed: int = int(seed)
        self.p: float = float(p)

        if kind == "static":
            phases = [_normalise(edges or (), n_agents)]
        elif kind == "ring":
            ring = nx.cycle_graph(n_agents) if n_agents > 2 else nx.path_graph(n_agents)
            phases = [_normalise(ring.edges, n_agents)]
        elif kind == "star":
            phases = [_normalise(nx.star_graph(n_agents - 1).edges, n_agents)]
        elif kind == "complete":
            phases = [_normalise(nx.complete_graph(n_agents).edges, n_agents)]
        elif kind == "periodic":
            if not edges:
                raise ValueError("A periodic schedule needs a list of edge sets.")
            phases = [_normalise(es, n_agents) for es in edges]
        else:
            if not 0 <= p <= 1:
                raise ValueError(f"Edge probability {p} outside [0, 1].")
            phases = None

        self._phases: Optional[Tuple[EdgeSet, ...]] = (
            tuple(phases) if phases is not None else None
        )
        self.period: Optional[int] = len(phases) if phases is not None else None

    @property
    def is_periodic(self) -> bool:
        return self._phases is not None

    def edges_at(self, t: int) -> EdgeSet:
        if t < 1:
            raise ValueError(f"Time steps start at 1, got {t}.")
        if self._phases is not None:
            return self._phases[(t - 1) % self.period]

        state = np.random.SeedSequence([self.seed, t]).generate_state(1)[0]
        graph = nx.gnp_random_graph(self.n_agents, self.p, seed=int(state))
        return _normalise(graph.edges, self.n_agents)

    def neighbors_at(self, t: int) -> List[List[int]]:
        nbrs: List[List[int]] = [[] for _ in range(self.n_agents)]
        for i, j in sorted(self.edges_at(t)):
            nbrs[i].append(j)
            nbrs[j].append(i)
        return nbrs

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "kind", self.kind
        yield "n_agents", self.n_agents
        if self._phases is not None:
            yield "period", self.period
            yield "edges", [sorted(map(list, es)) for es in self._phases]
        else:
            yield "p", self.p
            yield "seed", self.seed

    def __repr__(self) -> str:
        return f"GraphSchedule({self.kind!r}, N={self.n_agents})"


class WeightScheme:
    """Row-stochastic averaging weights for every tracked agent j and step t.

    ``weights_at(j, t)[i, l]`` is the weight agent i puts on agent l's copy of
    agent j's frequency. Rows for j != i put ``self_weight`` on i and split the
    rest over current neighbors (``uniform``), or use Metropolis weights
    (``metropolis``, which ignores ``self_weight``); isolated agents keep their
    copy. Under ``exact`` agent i copies j's own entry outright whenever j is a
    current neighbor and keeps its copy otherwise, so on a complete graph
    every copy equals the true frequency after each exchange. The row for
    j == i is always the unit row, so each agent's own entry is exactly its
    own frequency.
    """

    __slots__ = (
        "schedule",
        "self_weight",
        "rule",
        "eta",
        "_phases",
    )

    def __init__(self, schedule: GraphSchedule, self_weight: float, rule: str = "uniform"):
        if not 0 < self_weight < 1:
            raise ValueError(f"Self weight {self_weight} outside (0, 1).")
        if rule not in RULES:
            raise ValueError(f"Unknown weight rule {rule!r}.")

        self.schedule: GraphSchedule = schedule
        self.self_weight: float = float(self_weight)
        self.rule: str = rule

        self._phases: Optional[Tuple[np.ndarray, ...]] = None
        if schedule.is_periodic:
            self._phases = tuple(
                self._build(t) for t in range(1, schedule.period + 1)
            )
        self.eta: float = 1.0

    @property
    def n_agents(self) -> int:
        return self.schedule.n_agents

    def _build(self, t: int) -> np.ndarray:
        n = self.n_agents
        nbrs = self.schedule.neighbors_at(t)
        mat = np.zeros((n, n))

        for i in range(n):
            if not nbrs[i] or self.rule == "exact":
                mat[i, i] = 1.0
            elif self.rule == "uniform":
                mat[i, i] = self.self_weight
                mat[i, nbrs[i]] = (1 - self.self_weight) / len(nbrs[i])
            else:
                for l in nbrs[i]:
                    mat[i, l] = 1 / (1 + max(len(nbrs[i]), len(nbrs[l])))
                mat[i, i] = 1 - mat[i].sum()

        mat.flags.writeable = False
        return mat

    def base_at(self, t: int) -> np.ndarray:
        """The weights shared by every j != i row at step t. Under ``exact``
            rows depend on j, and this is the identity.
        """
        if self._phases is not None:
            return self._phases[(t - 1) % len(self._phases)]
        return self._build(t)

    def _tracking(self, mat: np.ndarray, j: int, nbrs: List[List[int]]) -> np.ndarray:
        if self.rule == "exact":
            for i in nbrs[j]:
                mat[i] = 0.0
                mat[i, j] = 1.0
        mat[j] = 0.0
        mat[j, j] = 1.0
        return mat

    def weights_at(self, j: int, t: int) -> np.ndarray:
        nbrs = self.schedule.neighbors_at(t) if self.rule == "exact" else []
        return self._tracking(self.base_at(t).copy(), j, nbrs)

    def stack_at(self, t: int) -> np.ndarray:
        """``weights_at(j, t)`` for every j, stacked along the first axis."""
        n = self.n_agents
        nbrs = self.schedule.neighbors_at(t) if self.rule == "exact" else []
        stack = np.repeat(self.base_at(t)[np.newaxis], n, axis=0)
        for j in range(n):
            self._tracking(stack[j], j, nbrs)
        return stack

    def min_positive(self) -> float:
        """Smallest positive weight: exact over one period, and for random
            schedules the bound every step respects, since no degree exceeds
            N - 1.
        """
        if self._phases is not None:
            return min(float(m[m > 0].min()) for m in self._phases)

        n = self.n_agents
        if n < 2 or self.rule == "exact":
            return 1.0
        if self.rule == "uniform":
            return min(self.self_weight, (1 - self.self_weight) / (n - 1))
        return 1 / n

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "rule", self.rule
        yield "self_weight", self.self_weight
        yield "eta", self.eta
        yield "schedule", dict(self.schedule)


def build_weights(
    schedule: GraphSchedule, self_weight: float, rule: str = "uniform"
) -> WeightScheme:
    """Weights for a schedule, with ``eta`` set to the smallest positive entry."""
    scheme = WeightScheme(schedule, self_weight, rule)
    scheme.eta = scheme.min_positive()
    return scheme


class BeliefState:
    """Every agent's local copies of everyone's empirical frequencies.

    ``entries[i, j]`` is agent i's copy of agent j's frequency.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: np.ndarray, tol: float = SIMPLEX_TOL):
        entries = np.array(entries, dtype=float)
        if entries.ndim != 3 or entries.shape[0] != entries.shape[1]:
            raise ShapeError(f"Beliefs must be (N, N, K), got {entries.shape}.")
        if entries.min() < -tol or np.abs(entries.sum(axis=2) - 1).max() > tol:
            raise ValueError("Every belief must lie on the simplex.")

        entries.flags.writeable = False
        self.entries: np.ndarray = entries

    @classmethod
    def from_frequencies(cls, freqs: np.ndarray) -> "BeliefState":
        """Every agent starts with exact copies of the given frequencies."""
        freqs = np.asarray(freqs, dtype=float)
        return cls(np.broadcast_to(freqs, (freqs.shape[0],) + freqs.shape))

    @property
    def n_agents(self) -> int:
        return self.entries.shape[0]

    @property
    def n_actions(self) -> int:
        return self.entries.shape[2]

    def row(self, i: int) -> np.ndarray:
        """Agent i's view of every agent, an ``(N, K)`` profile."""
        return self.entries[i]

    def own(self) -> np.ndarray:
        return np.einsum("iik->ik", self.entries)

    def pinned(self, freqs: np.ndarray) -> "BeliefState":
        """Copy with each agent's own entry set to its frequency."""
        entries = self.entries.copy()
        idx = np.arange(self.n_agents)
        entries[idx, idx] = freqs
        return type(self)(entries)


def belief_update(beliefs: BeliefState, weights: WeightScheme, t: int) -> BeliefState:
    """One averaging round: ``υ^i_j <- Σ_l w^i_{jl,t} υ^l_j`` for all i, j."""
    if beliefs.n_agents != weights.n_agents:
        raise ShapeError(
            f"Beliefs over {beliefs.n_agents} agents, weights over {weights.n_agents}."
        )

    new = np.einsum("jil,ljk->ijk", weights.stack_at(t), beliefs.entries)
    return BeliefState(new)


def belief_errors(beliefs: BeliefState, freqs: np.ndarray) -> Tuple[float, float]:
    """Average and largest ``||υ^i_j - f_j||`` over ordered pairs i != j."""
    n = beliefs.n_agents
    if n < 2:
        return 0.0, 0.0

    gaps = np.linalg.norm(beliefs.entries - freqs[np.newaxis], axis=2)
    off = ~np.eye(n, dtype=bool)
    return float(gaps[off].mean()), float(gaps[off].max())


__all__ = (
    "belief_errors",
    "belief_update",
    "BeliefState",
    "build_weights",
    "Edge",
    "EdgeSet",
    "GraphSchedule",
    "KINDS",
    "RULES",
    "WeightScheme",
)
