"""The decentralized fictitious play loop.

Each step, in order: every agent best-responds to its own beliefs from the
previous step, every agent folds its action into its empirical frequency, and
the agents average their copies of everyone's frequencies over the current
graph. The centralized variant replaces the exchange with exact knowledge of
every frequency, which is classical fictitious play.
"""

from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exc import AssumptionError, ShapeError
from .network import (
    belief_errors,
    belief_update,
    BeliefState,
    WeightScheme,
)
from .network.checks import weight_problems
from .normal_form import as_matrix, GameOracle, MixedStrategy, regret
from .util import newLogger


TIEBREAKS = ("lowest", "uniform")
INITIAL_RULES = ("uniform", "dirichlet")
TIE_TOL: float = 1e-12

log = newLogger("dfplay.engine")


def empirical_update(
    f: Union[MixedStrategy, np.ndarray], action: int, t: int
) -> np.ndarray:
    """``((t - 1) / t) f + (1 / t) e_action``."""
    if t < 1:
        raise ValueError(f"Empirical updates start at t=1, got {t}.")
    f = f.probs if isinstance(f, MixedStrategy) else np.asarray(f, dtype=float)
    if not 0 <= action < f.size:
        raise IndexError(f"Action {action} outside 0..{f.size - 1}.")

    out = f * ((t - 1) / t)
    out[action] += 1 / t
    return out


def best_response(
    oracle: GameOracle,
    agent: int,
    beliefs: np.ndarray,
    tiebreak: str = "lowest",
    rng: np.random.Generator = None,
    t: int = None,
) -> int:
    """Action maximising expected utility against the agent's beliefs.

    :param beliefs: The agent's ``(N, K)`` view of everyone; its own row is
        ignored.
    :param tiebreak: ``lowest`` picks the lowest tied index; ``uniform`` draws
        among ties with ``rng``.
    """
    values = oracle.payoffs(agent, beliefs, t)
    top = np.flatnonzero(values >= values.max() - TIE_TOL)

    if tiebreak == "lowest" or top.size == 1:
        return int(top[0])
    if tiebreak != "uniform":
        raise ValueError(f"Unknown tie-break {tiebreak!r}.")
    if rng is None:
        raise ValueError("Uniform tie-breaking needs a random generator.")
    return int(rng.choice(top))


class DfpState:
    """Step counter, per-agent frequencies, beliefs, and last actions."""

    __slots__ = (
        "t",
        "frequencies",
        "beliefs",
        "last_actions",
    )

    def __init__(
        self,
        t: int,
        frequencies: np.ndarray,
        beliefs: BeliefState,
        last_actions: Optional[Sequence[int]] = None,
    ):
        frequencies = np.array(frequencies, dtype=float)
        if frequencies.shape != (beliefs.n_agents, beliefs.n_actions):
            raise ShapeError(
                f"Frequencies of shape {frequencies.shape} do not match beliefs"
                f" over {beliefs.n_agents} agents and {beliefs.n_actions} actions."
            )
        frequencies.flags.writeable = False

        self.t: int = t
        self.frequencies: np.ndarray = frequencies
        self.beliefs: BeliefState = beliefs
        self.last_actions: Optional[Tuple[int, ...]] = (
            tuple(last_actions) if last_actions is not None else None
        )

    @classmethod
    def initial(
        cls, frequencies: np.ndarray, beliefs: Optional[BeliefState] = None
    ) -> "DfpState":
        """Step 0. Without explicit beliefs, every agent's copies equal the
            initial frequencies.
        """
        frequencies = np.asarray(frequencies, dtype=float)
        if beliefs is None:
            beliefs = BeliefState.from_frequencies(frequencies)
        return cls(0, frequencies, beliefs.pinned(frequencies))

    @property
    def n_agents(self) -> int:
        return self.frequencies.shape[0]

    @property
    def n_actions(self) -> int:
        return self.frequencies.shape[1]


def dfp_step(
    oracle: GameOracle,
    state: DfpState,
    weights: Optional[WeightScheme],
    *,
    tiebreak: str = "lowest",
    rng: np.random.Generator = None,
    centralized: bool = False,
    debug: bool = False,
) -> DfpState:
    """Advance play by one step.

    With ``centralized`` every agent sees the exact frequencies and
    ``weights`` may be None.
    """
    t = state.t + 1
    n = state.n_agents

    actions = tuple(
        best_response(oracle, i, state.beliefs.row(i), tiebreak, rng, t)
        for i in range(n)
    )

    freqs = np.vstack(
        [empirical_update(state.frequencies[i], a, t) for i, a in enumerate(actions)]
    )

    if centralized:
        beliefs = BeliefState.from_frequencies(freqs)
    else:
        if weights is None:
            raise ValueError("Decentralized play needs a weight scheme.")
        if debug:
            problems = weight_problems(weights, t)
            if problems:
                raise AssumptionError(
                    "weights", f"{len(problems)} weight problems at step {t}", problems
                )
        beliefs = belief_update(state.beliefs.pinned(freqs), weights, t)

    return DfpState(t, freqs, beliefs, actions)


class DfpSettings:
    """Play options. ``initial`` is ``uniform``, ``dirichlet``, or an explicit
        ``(N, K)`` array of starting frequencies.
    """

    __slots__ = (
        "horizon",
        "tiebreak",
        "initial",
        "copy_initial",
        "centralized",
        "keep_beliefs",
        "debug",
    )

    def __init__(
        self,
        horizon: int = 500,
        tiebreak: str = "lowest",
        initial: Union[str, Sequence] = "uniform",
        copy_initial: bool = True,
        centralized: bool = False,
        keep_beliefs: bool = False,
        debug: bool = False,
    ):
        self.horizon: int = horizon
        self.tiebreak: str = tiebreak
        self.initial: Union[str, Sequence] = initial
        self.copy_initial: bool = copy_initial
        self.centralized: bool = centralized
        self.keep_beliefs: bool = keep_beliefs
        self.debug: bool = debug

    def validate(self) -> None:
        if int(self.horizon) < 1:
            raise ValueError("horizon must be at least 1")
        if self.tiebreak not in TIEBREAKS:
            raise ValueError(f"tiebreak must be one of {TIEBREAKS}")
        if isinstance(self.initial, str) and self.initial not in INITIAL_RULES:
            raise ValueError(f"initial must be one of {INITIAL_RULES} or an array")

    def initial_frequencies(
        self, n_agents: int, n_actions: int, rng: np.random.Generator = None
    ) -> np.ndarray:
        if isinstance(self.initial, str):
            if self.initial == "uniform":
                return np.full((n_agents, n_actions), 1 / n_actions)
            if rng is None:
                raise ValueError("Dirichlet initial frequencies need a generator.")
            return rng.dirichlet(np.ones(n_actions), size=n_agents)
        return as_matrix(self.initial, n_agents, n_actions)

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "horizon", self.horizon
        yield "tiebreak", self.tiebreak
        yield "initial", (
            self.initial
            if isinstance(self.initial, str)
            else np.asarray(self.initial).tolist()
        )
        yield "copy_initial", self.copy_initial
        yield "centralized", self.centralized
        yield "keep_beliefs", self.keep_beliefs
        yield "debug", self.debug


class Trajectory:
    """Per-step record of play, for steps ``t = 1 .. horizon``.

    Arrays are indexed by ``t - 1``; ``initial`` holds the step-0 frequencies.
    """

    __slots__ = (
        "actions",
        "frequencies",
        "initial",
        "regrets",
        "potential",
        "belief_error",
        "belief_error_max",
        "beliefs",
    )

    def __init__(
        self,
        n_agents: int,
        n_actions: int,
        horizon: int,
        initial: np.ndarray,
        keep_beliefs: bool = False,
    ):
        self.actions: np.ndarray = np.zeros((horizon, n_agents), dtype=int)
        self.frequencies: np.ndarray = np.zeros((horizon, n_agents, n_actions))
        self.initial: np.ndarray = np.array(initial, dtype=float)
        self.regrets: np.ndarray = np.zeros((horizon, n_agents))
        self.potential: np.ndarray = np.full(horizon, np.nan)
        self.belief_error: np.ndarray = np.zeros(horizon)
        self.belief_error_max: np.ndarray = np.zeros(horizon)
        self.beliefs: Optional[np.ndarray] = (
            np.zeros((horizon, n_agents, n_agents, n_actions)) if keep_beliefs else None
        )

    def record(self, state: DfpState, oracle: GameOracle, potential: Callable = None) -> None:
        k = state.t - 1
        self.actions[k] = state.last_actions
        self.frequencies[k] = state.frequencies
        self.regrets[k] = regret(oracle, state.frequencies, state.t)[1]
        if potential is not None:
            self.potential[k] = potential(state.frequencies)
        self.belief_error[k], self.belief_error_max[k] = belief_errors(
            state.beliefs, state.frequencies
        )
        if self.beliefs is not None:
            self.beliefs[k] = state.beliefs.entries

    @property
    def horizon(self) -> int:
        return self.actions.shape[0]

    @property
    def n_agents(self) -> int:
        return self.actions.shape[1]

    @property
    def n_actions(self) -> int:
        return self.frequencies.shape[2]

    @property
    def steps(self) -> np.ndarray:
        return np.arange(1, self.horizon + 1)

    @property
    def max_regret(self) -> np.ndarray:
        return self.regrets.max(axis=1)

    def joint(self, t: int) -> np.ndarray:
        """Concatenated frequency vector at step t (0 gives the initial one)."""
        return (self.initial if t == 0 else self.frequencies[t - 1]).ravel()


def run(
    oracle: GameOracle,
    weights: Optional[WeightScheme],
    settings: DfpSettings,
    *,
    potential: Callable[[np.ndarray], float] = None,
    init_rng: np.random.Generator = None,
    tiebreak_rng: np.random.Generator = None,
    on_step: Callable[[DfpState], None] = None,
) -> Trajectory:
    """Play ``settings.horizon`` steps and record every one.

    Deterministic given the settings and the two generators. With
    ``copy_initial`` every agent's initial copies equal the initial
    frequencies; otherwise copies of others start uniform.
    """
    settings.validate()
    n, k = oracle.n_agents, oracle.n_actions

    freqs = settings.initial_frequencies(n, k, init_rng)
    if settings.copy_initial or settings.centralized:
        beliefs = None
    else:
        beliefs = BeliefState(np.full((n, n, k), 1 / k))

    state = DfpState.initial(freqs, beliefs)
    trajectory = Trajectory(n, k, settings.horizon, freqs, settings.keep_beliefs)

    for _ in range(settings.horizon):
        state = dfp_step(
            oracle,
            state,
            weights,
            tiebreak=settings.tiebreak,
            rng=tiebreak_rng,
            centralized=settings.centralized,
            debug=settings.debug,
        )
        trajectory.record(state, oracle, potential)
        if on_step is not None:
            on_step(state)

    log.debug(f"Finished {settings.horizon} steps over {n} agents.")
    return trajectory


__all__ = (
    "BeliefState",
    "best_response",
    "DfpSettings",
    "DfpState",
    "dfp_step",
    "empirical_update",
    "run",
    "Trajectory",
)
