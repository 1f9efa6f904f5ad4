"""Checks of the connectivity and weight assumptions on a schedule.

For periodic schedules (static, ring, star, complete, periodic) the set of
edges that recur forever is exactly the union over one period. For random
schedules it can only be observed, so the union over the inspected horizon is
used and every result is "empirical over horizon".
"""

from typing import Dict, List, Set, Tuple

import networkx as nx
import numpy as np

from ..util import Check
from . import Edge, EdgeSet, GraphSchedule, WeightScheme


STOCHASTIC_TOL: float = 1e-12


def recurring_edges(schedule: GraphSchedule, horizon: int) -> EdgeSet:
    steps = schedule.period if schedule.is_periodic else horizon
    edges: Set[Edge] = set()
    for t in range(1, steps + 1):
        edges |= schedule.edges_at(t)
    return frozenset(edges)


def check_connectivity(schedule: GraphSchedule, horizon: int) -> Tuple[bool, EdgeSet]:
    """Whether the graph of recurring edges is connected, and its edge set."""
    edges = recurring_edges(schedule, horizon)
    graph = nx.Graph()
    graph.add_nodes_from(range(schedule.n_agents))
    graph.add_edges_from(edges)
    return nx.is_connected(graph), edges


def _appearances(schedule: GraphSchedule, steps: int, edges: EdgeSet) -> Dict[Edge, List[int]]:
    seen: Dict[Edge, List[int]] = {e: [] for e in edges}
    for t in range(1, steps + 1):
        for e in schedule.edges_at(t):
            if e in seen:
                seen[e].append(t)
    return seen


def check_bounded_interval(schedule: GraphSchedule, horizon: int) -> Tuple[bool, int]:
    """The largest wait, over recurring edges, between appearances.

    Periodic schedules are read over one period, with the gap wrapping from
    the last appearance to the first one of the next period, so the result
    does not depend on ``horizon``. For random schedules gaps run from the
    start of play to the first appearance, between appearances, and from the
    last appearance to the end of the horizon; an edge seen only once in a
    horizon of more than one step cannot be certified to recur, and fails.
    """
    edges = recurring_edges(schedule, horizon)

    if schedule.is_periodic:
        period = schedule.period
        bound = 0
        for times in _appearances(schedule, period, edges).values():
            wrap = period - times[-1] + times[0]
            bound = max(bound, times[0], wrap, *np.diff(times).astype(int).tolist())
        return True, int(bound)

    bound = 0
    ok = True
    for times in _appearances(schedule, horizon, edges).values():
        if not times or (len(times) < 2 and horizon > 1):
            ok = False
            continue
        gaps = np.diff([0] + times + [horizon + 1])
        bound = max(bound, int(gaps.max()))

    return ok, bound


def weight_problems(weights: WeightScheme, t: int) -> List[str]:
    """Everything wrong with the step-t weights: rows not summing to 1, weight
        outside the current neighborhood, positive weight below ``eta``, or an
        own-row that is not the unit row.
    """
    n = weights.n_agents
    allowed = np.eye(n, dtype=bool)
    for i, j in weights.schedule.edges_at(t):
        allowed[i, j] = allowed[j, i] = True

    problems: List[str] = []
    for j in range(n):
        mat = weights.weights_at(j, t)
        if np.abs(mat.sum(axis=1) - 1).max() > STOCHASTIC_TOL:
            problems.append(f"t={t} j={j}: rows do not sum to 1")
        if (mat[~allowed] != 0).any():
            problems.append(f"t={t} j={j}: weight outside the neighborhood")
        low = mat[mat > 0].min()
        if low < weights.eta - STOCHASTIC_TOL:
            problems.append(f"t={t} j={j}: weight {low} below eta")
        if mat[j, j] != 1.0:
            problems.append(f"t={t} j={j}: own entry is not pinned")
    return problems


def check_weights(weights: WeightScheme, horizon: int) -> Check:
    """``weight_problems`` over one period, or over ``horizon`` steps for
        random schedules.
    """
    steps = weights.schedule.period or horizon
    problems = [p for t in range(1, steps + 1) for p in weight_problems(weights, t)]

    return Check(
        "weights",
        not problems,
        f"row-stochastic with eta={weights.eta:.6g}"
        if not problems
        else f"{len(problems)} weight problems",
        problems[:10] or None,
    )


def assumption_checks(weights: WeightScheme, horizon: int) -> List[Check]:
    """Connectivity, bounded interval, and weights, as named checks."""
    schedule = weights.schedule
    scope = "exact" if schedule.is_periodic else "empirical over horizon"

    connected, edges = check_connectivity(schedule, horizon)
    bounded, t_b = check_bounded_interval(schedule, horizon)

    return [
        Check(
            "connectivity",
            connected,
            f"recurring graph {'is' if connected else 'is not'} connected ({scope})",
            {"edges": sorted(map(list, edges))},
        ),
        Check(
            "bounded_interval",
            bounded,
            f"T_B = {t_b} ({scope})" if bounded else "some edge does not recur",
            {"T_B": t_b},
        ),
        check_weights(weights, horizon),
    ]
