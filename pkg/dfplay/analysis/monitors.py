"""Runtime monitors over recorded trajectories: potential increments outside
the approximate equilibrium set, excursions between nested sets, the step-size
bound, and belief consensus rates.

Step t of play is stored at index ``t - 1`` of every trajectory array.
"""

from math import log
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np

from ..engine import Trajectory
from ..network import belief_update, BeliefState, WeightScheme
from ..util import Check


def _potential_series(
    trajectory: Trajectory, potential: Optional[Callable[[np.ndarray], float]]
) -> np.ndarray:
    if potential is not None:
        return np.array([potential(f) for f in trajectory.frequencies])
    if np.isnan(trajectory.potential).any():
        raise ValueError("The trajectory holds no potential values to monitor.")
    return trajectory.potential


class IncrementReport:
    """Outcome of the potential-increment monitor.

    ``constant`` is the smallest C for which every qualifying step of the
    calibration window meets the bound; ``violations`` lists later qualifying
    steps that miss it, with their residuals.
    """

    __slots__ = (
        "constant",
        "qualifying",
        "violations",
        "residuals",
        "calibration",
    )

    def __init__(
        self,
        constant: float,
        qualifying: int,
        violations: List[int],
        residuals: List[float],
        calibration: Tuple[int, int],
    ):
        self.constant: float = constant
        self.qualifying: int = qualifying
        self.violations: List[int] = violations
        self.residuals: List[float] = residuals
        self.calibration: Tuple[int, int] = calibration

    @property
    def fraction(self) -> float:
        return len(self.violations) / self.qualifying if self.qualifying else 0.0

    def check(self, limit: float = 0.05) -> Check:
        return Check(
            "potential_increment",
            self.fraction <= limit,
            f"{len(self.violations)}/{self.qualifying} qualifying steps below"
            f" the bound with C={self.constant:.6g}",
            {"violations": self.violations[:50]},
        )

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "constant", self.constant
        yield "qualifying", self.qualifying
        yield "violations", self.violations
        yield "fraction", self.fraction
        yield "calibration", list(self.calibration)


def lemma2_monitor(
    trajectory: Trajectory,
    potential: Callable[[np.ndarray], float] = None,
    *,
    delta: float,
    eps: float,
    t_start: int,
) -> IncrementReport:
    """Check that the reference potential rises while play is outside the
        ``eps``-equilibrium set.

    At every step t >= ``t_start`` whose regret exceeds ``eps`` the increment
    ``u(f_{t+1}) - u(f_t)`` should be at least
    ``(eps - N delta) / (t + 1) - C log(t) / t^2``. C is fitted over
    ``[t_start, 2 t_start)``; steps after that window are counted as
    violations when they miss the bound.
    """
    n = trajectory.n_agents
    if eps <= n * delta:
        raise ValueError(f"eps={eps} must exceed N*delta={n * delta}.")

    values = _potential_series(trajectory, potential)
    regrets = trajectory.max_regret
    end = 2 * t_start

    def needed(t: int) -> Tuple[float, float]:
        increment = values[t] - values[t - 1]
        floor = (eps - n * delta) / (t + 1)
        return increment, (floor - increment) * t * t / log(t)

    constant = 0.0
    for t in range(max(t_start, 2), min(end, trajectory.horizon)):
        if regrets[t - 1] > eps:
            constant = max(constant, needed(t)[1])

    qualifying, violations, residuals = 0, [], []
    for t in range(max(end, 2), trajectory.horizon):
        if regrets[t - 1] <= eps:
            continue
        qualifying += 1
        increment, c_t = needed(t)
        if c_t > constant * (1 + 1e-9) + 1e-12:
            violations.append(t)
            bound = (eps - n * delta) / (t + 1) - constant * log(t) / (t * t)
            residuals.append(float(increment - bound))

    return IncrementReport(constant, qualifying, violations, residuals, (t_start, end))


class ExcursionRecord:
    """One trip out of the inner approximate set that also leaves the outer
        one: play leaves the inner set at ``T1``, the outer set at ``T2``,
        returns to the outer set at ``T2p`` and to the inner set at ``T1p``.
    """

    __slots__ = (
        "T1",
        "T2",
        "T2p",
        "T1p",
        "eps1",
        "eps2",
        "potential_gain",
        "bound",
    )

    def __init__(
        self,
        T1: int,
        T2: int,
        T2p: int,
        T1p: int,
        eps1: float,
        eps2: float,
        potential_gain: float,
        bound: float,
    ):
        if not T1 <= T2 < T2p <= T1p:
            raise ValueError(f"Excursion indices out of order: {(T1, T2, T2p, T1p)}.")
        if not 0 < eps1 < eps2:
            raise ValueError(f"Need 0 < eps1 < eps2, got {eps1}, {eps2}.")

        self.T1: int = T1
        self.T2: int = T2
        self.T2p: int = T2p
        self.T1p: int = T1p
        self.eps1: float = eps1
        self.eps2: float = eps2
        self.potential_gain: float = potential_gain
        self.bound: float = bound

    @property
    def holds(self) -> bool:
        return self.potential_gain >= self.bound

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        for key in self.__slots__:
            yield key, getattr(self, key)
        yield "holds", self.holds

    def __repr__(self) -> str:
        return f"ExcursionRecord({self.T1}, {self.T2}, {self.T2p}, {self.T1p})"


def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Maximal ``[start, stop)`` index ranges where ``mask`` is set."""
    edges = np.diff(np.concatenate([[0], mask.astype(int), [0]]))
    starts, stops = np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)
    return [(int(a), int(b)) for a, b in zip(starts, stops)]


def detect_excursions(
    trajectory: Trajectory,
    eps1: float,
    eps2: float,
    delta: float,
    potential: Callable[[np.ndarray], float] = None,
) -> List[ExcursionRecord]:
    """Every excursion that starts after a step inside the inner set
        ``N delta + eps1`` and ends back inside it.

    One record is emitted for each stretch outside the outer set
    ``N delta + eps2`` within such an excursion. The bound is
    ``Σ_{t=T2}^{T2p-1} 2 eps2 / (3 (t + 1))``.
    """
    if not 0 < eps1 < eps2:
        raise ValueError(f"Need 0 < eps1 < eps2, got {eps1}, {eps2}.")

    n = trajectory.n_agents
    values = _potential_series(trajectory, potential)
    regrets = trajectory.max_regret
    inner, outer = n * delta + eps1, n * delta + eps2

    records = []
    for start, stop in _runs(regrets > inner):
        # Needs a recorded step inside before leaving and one after returning.
        if start == 0 or stop == len(regrets):
            continue
        T1, T1p = start + 1, stop + 1

        for sub_start, sub_stop in _runs(regrets[start:stop] > outer):
            T2, T2p = start + sub_start + 1, start + sub_stop + 1
            steps = np.arange(T2, T2p)
            records.append(
                ExcursionRecord(
                    T1,
                    T2,
                    T2p,
                    T1p,
                    eps1,
                    eps2,
                    float(values[T1p - 1] - values[T1 - 1]),
                    float((2 * eps2 / (3 * (steps + 1))).sum()),
                )
            )

    return records


def step_sizes(trajectory: Trajectory) -> np.ndarray:
    """``||f_{t+1} - f_t||`` for t = 0 .. horizon - 1, with f_0 the initial
        frequencies.
    """
    flat = trajectory.frequencies.reshape(trajectory.horizon, -1)
    prev = np.vstack([trajectory.initial.ravel(), flat[:-1]])
    return np.linalg.norm(flat - prev, axis=1)


def step_size_violations(trajectory: Trajectory, tol: float = 1e-12) -> Check:
    """Every step must move at most ``2N / (t + 1)``."""
    sizes = step_sizes(trajectory)
    bound = 2 * trajectory.n_agents / np.arange(1, trajectory.horizon + 1)
    bad = np.flatnonzero(sizes > bound + tol)
    return Check(
        "step_size",
        bad.size == 0,
        f"{bad.size} steps exceed 2N/(t+1)",
        {"steps": bad.tolist()[:50], "max_ratio": float((sizes / bound).max())},
    )


def frequency_drift(trajectory: Trajectory) -> float:
    """Largest gap between recorded frequencies and the running mean of the
        recorded actions.
    """
    counts = np.zeros((trajectory.n_agents, trajectory.n_actions))
    worst = 0.0
    rows = np.arange(trajectory.n_agents)
    for k in range(trajectory.horizon):
        counts[rows, trajectory.actions[k]] += 1
        gap = np.abs(counts / (k + 1) - trajectory.frequencies[k]).max()
        worst = max(worst, float(gap))
    return worst


class ConsensusFit:
    """Fit of the largest belief error against ``C log(t) / t``.

    ``constant`` is fitted over the first half of ``[t_min, horizon]``; the
    second half must stay within ``slack`` times that curve.
    """

    __slots__ = (
        "constant",
        "tail_ratio",
        "final_error",
        "slack",
    )

    def __init__(
        self, constant: float, tail_ratio: float, final_error: float, slack: float
    ):
        self.constant: float = constant
        self.tail_ratio: float = tail_ratio
        self.final_error: float = final_error
        self.slack: float = slack

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.constant) and self.tail_ratio <= self.slack)

    def check(self) -> Check:
        return Check(
            "consensus_rate",
            self.ok,
            f"C={self.constant:.6g}, tail at {self.tail_ratio:.3g} of the fitted curve",
            dict(self),
        )

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "constant", self.constant
        yield "tail_ratio", self.tail_ratio
        yield "final_error", self.final_error


def consensus_rate(
    trajectory: Trajectory, t_min: int = 10, slack: float = 1.5
) -> ConsensusFit:
    errors = trajectory.belief_error_max
    horizon = trajectory.horizon
    t_min = max(t_min, 2)
    if horizon < t_min + 1:
        return ConsensusFit(0.0, 0.0, float(errors[-1]), slack)

    t = np.arange(t_min, horizon + 1)
    scaled = errors[t - 1] * t / np.log(t)
    half = max(1, len(t) // 2)

    constant = float(scaled[:half].max())
    tail = scaled[half:]
    if constant > 0:
        ratio = float(tail.max() / constant) if tail.size else 0.0
    else:
        ratio = 0.0 if not tail.size or tail.max() == 0 else float("inf")
    return ConsensusFit(constant, ratio, float(errors[-1]), slack)


def consensus_decay(
    weights: WeightScheme, frequencies: np.ndarray, steps: int, rng: np.random.Generator
) -> Tuple[float, np.ndarray]:
    """Average beliefs with frozen frequencies from random starting copies.

    :return: The slope of ``log(max error)`` against t, and the error series.
    """
    n, k = np.asarray(frequencies).shape
    beliefs = BeliefState(rng.dirichlet(np.ones(k), size=(n, n))).pinned(frequencies)

    errors = np.empty(steps)
    for t in range(1, steps + 1):
        beliefs = belief_update(beliefs, weights, t)
        errors[t - 1] = np.abs(beliefs.entries - frequencies[np.newaxis]).max()

    live = errors > 1e-13
    if live.sum() < 2:
        return float("-inf"), errors
    slope = np.polyfit(np.arange(1, steps + 1)[live], np.log(errors[live]), 1)[0]
    return float(slope), errors


def one_to_one(trajectory: Trajectory, window: int = 50) -> bool:
    """Whether every step of the final ``window`` assigns distinct targets."""
    tail = trajectory.actions[-window:]
    return all(len(set(row)) == trajectory.n_agents for row in tail.tolist())


__all__ = (
    "consensus_decay",
    "consensus_rate",
    "ConsensusFit",
    "detect_excursions",
    "ExcursionRecord",
    "frequency_drift",
    "IncrementReport",
    "lemma2_monitor",
    "one_to_one",
    "step_size_violations",
    "step_sizes",
)
