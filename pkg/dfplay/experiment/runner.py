"""Seeded replications of decentralized play, run one after another or over a
process pool.

Every random choice draws from a named stream derived from
``(master seed, run index, stream)``, so toggling one source of randomness
leaves the others unchanged. Streams do not depend on the network kind, so
ring and star runs with the same index play the same game.
"""

from asyncio import gather, get_running_loop, run as run_async
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..analysis import AssignmentAtlas, basin_tracker, EquilibriumAtlas, fig1_metrics
from ..analysis.monitors import (
    consensus_rate,
    detect_excursions,
    frequency_drift,
    lemma2_monitor,
    one_to_one,
    step_size_violations,
)
from ..engine import DfpSettings, run, Trajectory
from ..exc import AssumptionError
from ..games import (
    default_geometry,
    estimate_targets,
    identity_coordination,
    perturb_potential_game,
    SignalModel,
    TargetAssignmentGame,
    TargetOracle,
)
from ..network import build_weights, GraphSchedule, WeightScheme
from ..network.checks import assumption_checks
from ..normal_form import expected_potential, GameOracle, NormalFormGame, TableOracle
from ..normal_form.fileio import load_game
from ..normal_form.potential import (
    check_potential,
    LSQ_GUARD,
    mpd,
    nearest_potential_lsq,
    path_potential,
)
from ..util import callback_failure, callback_result, echo, err, hl_value, newLogger
from .config import ExperimentConfig


STREAMS = ("geometry", "signals", "tiebreak", "network", "perturb", "initial")

log = newLogger("dfplay.runner")


def stream_rng(seed: int, run_index: int, stream: str) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(run_index, STREAMS.index(stream)))
    )


class Scenario:
    """Everything a replication needs about the game being played.

    ``potential`` evaluates the reference potential at a mixed profile, and
    ``delta`` is the MPD from the played game to that reference; either may be
    None where no reference is known.
    """

    __slots__ = (
        "oracle",
        "atlas",
        "game",
        "reference",
        "potential",
        "delta",
        "meta",
    )

    def __init__(
        self,
        oracle: GameOracle,
        atlas,
        game: Optional[NormalFormGame] = None,
        reference: Optional[np.ndarray] = None,
        potential: Optional[Callable[[np.ndarray], float]] = None,
        delta: Optional[float] = None,
        meta: dict = None,
    ):
        self.oracle: GameOracle = oracle
        self.atlas = atlas
        self.game: Optional[NormalFormGame] = game
        self.reference: Optional[np.ndarray] = reference
        self.potential: Optional[Callable[[np.ndarray], float]] = potential
        self.delta: Optional[float] = delta
        self.meta: dict = meta or {}

    @property
    def n_agents(self) -> int:
        return self.oracle.n_agents

    @property
    def n_actions(self) -> int:
        return self.oracle.n_actions


def _target_scenario(config: ExperimentConfig, run_index: int) -> Scenario:
    s = config.scenario
    seed = config.replication.seed

    if s.agent_positions is not None and s.target_positions is not None:
        agents, targets = np.array(s.agent_positions), np.array(s.target_positions)
    else:
        agents, targets = default_geometry(
            s.n_agents,
            s.n_targets,
            stream_rng(seed, run_index, "geometry"),
            s.agent_std,
            s.target_radius,
        )
        if s.agent_positions is not None:
            agents = np.array(s.agent_positions, dtype=float)
        if s.target_positions is not None:
            targets = np.array(s.target_positions, dtype=float)

    meta = {"agent_positions": agents.tolist(), "target_positions": targets.tolist()}
    atlas = AssignmentAtlas(s.n_agents, s.n_targets)

    if s.equal_distance:
        game = TargetAssignmentGame.equal(s.n_agents, s.n_targets, s.distance)
        return Scenario(
            TargetOracle(game),
            atlas,
            potential=game.expected_potential,
            delta=0.0,
            meta=meta,
        )

    model = SignalModel(s.noise_std, s.signal_cutoff, seed)
    estimate = estimate_targets(
        model, agents, targets, config.dfp.horizon, stream_rng(seed, run_index, "signals")
    )
    game = TargetAssignmentGame(estimate.distances, agents, estimate.estimates)
    reference = TargetAssignmentGame.equal(
        s.n_agents, s.n_targets, float(estimate.distances.mean())
    )

    delta = None
    if s.n_targets ** s.n_agents <= LSQ_GUARD:
        delta = mpd(game.to_normal_form(), reference.to_normal_form())
    meta["distances"] = estimate.distances.tolist()

    return Scenario(
        TargetOracle(game, estimate.track),
        atlas,
        potential=reference.expected_potential,
        delta=delta,
        meta=meta,
    )


def _reference_for(game: NormalFormGame) -> Tuple[Optional[np.ndarray], Optional[float]]:
    """Exact potential when there is one, else the least-squares surrogate
        within the size guard.
    """
    cert = check_potential(game)
    if cert:
        return cert.potential, 0.0
    if game.n_profiles > LSQ_GUARD:
        return None, None
    nearest, _, delta = nearest_potential_lsq(game)
    return nearest.table(0), delta


def _table_scenario(
    game: NormalFormGame, mixed, reference, delta, meta=None
) -> Scenario:
    return Scenario(
        TableOracle(game),
        EquilibriumAtlas.from_game(game, mixed),
        game=game,
        reference=reference,
        potential=partial(expected_potential, reference) if reference is not None else None,
        delta=delta,
        meta=meta,
    )


def build_scenario(config: ExperimentConfig, run_index: int) -> Scenario:
    s = config.scenario
    if s.kind == "target":
        return _target_scenario(config, run_index)

    if s.kind == "game":
        game_file = load_game(s.game_file)
        reference, delta = _reference_for(game_file.game)
        return _table_scenario(
            game_file.game,
            game_file.mixed_equilibria,
            reference,
            delta,
            {"game_file": s.game_file},
        )

    if s.game_file:
        base = load_game(s.game_file).game
    else:
        base = identity_coordination(s.n_actions, s.n_agents)
    game, actual = perturb_potential_game(
        base, s.delta, stream_rng(config.replication.seed, run_index, "perturb")
    )

    if config.analysis.delta_source == "lsq":
        reference, delta = _reference_for(game)
    else:
        reference, delta = path_potential(base), actual
    return _table_scenario(game, (), reference, delta, {"mpd_to_base": actual})


def build_network(
    config: ExperimentConfig, kind: str, n_agents: int, run_index: int
) -> WeightScheme:
    net = config.network
    seed = int(
        stream_rng(config.replication.seed, run_index, "network").integers(2 ** 32)
    )
    schedule = GraphSchedule(n_agents, kind, edges=net.edges, seed=seed, p=net.p)
    return build_weights(schedule, net.self_weight, net.rule)


class RunSummary:
    """What one replication ended with, reproducible from (config, run index)."""

    __slots__ = (
        "run_index",
        "network",
        "final_profile",
        "one_to_one",
        "final_ne_distance",
        "final_regret",
        "basin",
        "flags",
        "delta",
        "consensus",
        "increments",
        "excursions",
    )

    def __init__(self, run_index: int, network: str):
        self.run_index: int = run_index
        self.network: str = network
        self.final_profile: List[int] = []
        self.one_to_one: Optional[bool] = None
        self.final_ne_distance: float = float("nan")
        self.final_regret: float = float("nan")
        self.basin: dict = {}
        self.flags: Dict[str, bool] = {}
        self.delta: Optional[float] = None
        self.consensus: Optional[dict] = None
        self.increments: Optional[dict] = None
        self.excursions: Optional[dict] = None

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        for key in self.__slots__:
            yield key, getattr(self, key)


class RunResult:
    __slots__ = (
        "run_index",
        "network",
        "trajectory",
        "ne_distance",
        "summary",
    )

    def __init__(
        self,
        run_index: int,
        network: str,
        trajectory: Trajectory,
        ne_distance: np.ndarray,
        summary: RunSummary,
    ):
        self.run_index: int = run_index
        self.network: str = network
        self.trajectory: Trajectory = trajectory
        self.ne_distance: np.ndarray = ne_distance
        self.summary: RunSummary = summary

    @property
    def belief_error(self) -> np.ndarray:
        return self.trajectory.belief_error


def thresholds(config: ExperimentConfig, scenario: Scenario) -> Dict[str, Optional[float]]:
    """Resolved ``eps`` and basin threshold for a scenario. Both are None when
        delta is unknown and the configuration does not set them.
    """
    a = config.analysis
    nd = scenario.n_agents * (scenario.delta or 0.0)
    eps = a.eps
    if eps is None and scenario.delta:
        eps = 2 * nd
    basin_eps = a.basin_eps
    if basin_eps is None and scenario.delta is not None:
        basin_eps = nd + a.eps1
    return {"eps": eps, "basin_eps": basin_eps}


def summarize(
    config: ExperimentConfig,
    scenario: Scenario,
    trajectory: Trajectory,
    ne_distance: np.ndarray,
    summary: RunSummary,
) -> RunSummary:
    a = config.analysis
    limits = thresholds(config, scenario)

    summary.final_profile = trajectory.actions[-1].tolist()
    summary.final_ne_distance = float(ne_distance[-1])
    summary.final_regret = float(trajectory.max_regret[-1])
    summary.delta = scenario.delta
    if isinstance(scenario.atlas, AssignmentAtlas):
        summary.one_to_one = one_to_one(trajectory, a.final_window)

    if limits["basin_eps"] is None:
        summary.basin = {"skipped": True, "threshold": None}
    else:
        basin = basin_tracker(trajectory, scenario.atlas, limits["basin_eps"])
        summary.basin = dict(basin)
        summary.basin["switches_after_entry"] = basin.switches_after_entry
        summary.basin["threshold"] = limits["basin_eps"]

    steps = step_size_violations(trajectory)
    summary.flags["step_size"] = steps.ok
    summary.flags["frequency_drift"] = frequency_drift(trajectory) <= 1e-12 * max(
        1, trajectory.horizon / 1000
    )

    if not config.dfp.centralized and trajectory.n_agents > 1:
        fit = consensus_rate(trajectory, a.consensus_t_min)
        summary.consensus = dict(fit)
        summary.flags["consensus_rate"] = fit.ok

    eps = limits["eps"]
    monitored = (
        a.monitors
        and scenario.potential is not None
        and scenario.delta is not None
        and eps is not None
        and eps > scenario.n_agents * scenario.delta
    )
    if monitored:
        inc = lemma2_monitor(trajectory, delta=scenario.delta, eps=eps, t_start=a.burn_in)
        summary.increments = dict(inc)
        summary.flags["potential_increment"] = inc.check(a.increment_limit).ok

        records = [
            r
            for r in detect_excursions(trajectory, a.eps1, a.eps2, scenario.delta)
            if r.T1 >= a.burn_in
        ]
        summary.excursions = {
            "count": len(records),
            "holding": sum(r.holds for r in records),
            "records": [dict(r) for r in records[:20]],
        }

    return summary


def run_replication(config: ExperimentConfig, run_index: int, network: str) -> RunResult:
    """One seeded run of play on one network kind, with its summary."""
    seed = config.replication.seed
    scenario = build_scenario(config, run_index)
    weights = build_network(config, network, scenario.n_agents, run_index)
    horizon = config.dfp.horizon

    summary = RunSummary(run_index, network)
    for check in assumption_checks(weights, horizon):
        summary.flags[check.name] = check.ok
        if config.analysis.strict:
            problem = AssumptionError.from_check(check)
            if problem is not None:
                raise problem

    d = config.dfp
    settings = DfpSettings(
        horizon, d.tiebreak, d.initial, d.copy_initial, d.centralized, d.keep_beliefs, d.debug
    )
    trajectory = run(
        scenario.oracle,
        weights,
        settings,
        potential=scenario.potential,
        init_rng=stream_rng(seed, run_index, "initial"),
        tiebreak_rng=stream_rng(seed, run_index, "tiebreak"),
    )

    ne_distance, _ = fig1_metrics(trajectory, scenario.atlas)
    summarize(config, scenario, trajectory, ne_distance, summary)
    log.debug(f"Run {run_index} on {network} finished at regret {summary.final_regret:.3g}.")
    return RunResult(run_index, network, trajectory, ne_distance, summary)


def announce(result: RunResult, index: int = None):
    s = result.summary
    extra = "" if s.one_to_one is None else f", one-to-one {s.one_to_one}"
    echo(
        "done",
        f"Run {index} on {hl_value(result.network)}: regret {s.final_regret:.3g},"
        f" NE distance {s.final_ne_distance:.3g}{extra}",
    )


report_done = callback_result(announce)


@callback_failure
def report_failed(exc: BaseException, index: int = None, network: str = ""):
    err(f"Run {index} on {network} failed:", exc)


async def run_experiment_async(config: ExperimentConfig) -> Dict[str, List[RunResult]]:
    """Every replication on every network kind, in run order.

    With one worker runs are sequential in this process. Otherwise they are
    gathered from a process pool, and each reports as it finishes.
    """
    config.validate()
    rep = config.replication
    results: Dict[str, List[RunResult]] = {}

    if rep.workers == 1:
        for kind in config.network.kinds:
            results[kind] = []
            for i in range(rep.n_runs):
                echo("run", f"Run {i} on {hl_value(kind)}.")
                results[kind].append(run_replication(config, i, kind))
                announce(results[kind][-1], index=i)
        return results

    loop = get_running_loop()
    with ProcessPoolExecutor(max_workers=rep.workers) as pool:
        for kind in config.network.kinds:
            futures = []
            for i in range(rep.n_runs):
                echo("run", f"Run {i} on {hl_value(kind)}.")
                future = loop.run_in_executor(pool, run_replication, config, i, kind)
                future.add_done_callback(partial(report_done, index=i))
                future.add_done_callback(partial(report_failed, index=i, network=kind))
                futures.append(future)
            results[kind] = list(await gather(*futures))

    return results


def run_experiment(config: ExperimentConfig) -> Dict[str, List[RunResult]]:
    return run_async(run_experiment_async(config))


__all__ = (
    "build_network",
    "build_scenario",
    "run_experiment",
    "run_experiment_async",
    "run_replication",
    "RunResult",
    "RunSummary",
    "Scenario",
    "stream_rng",
    "STREAMS",
    "summarize",
    "thresholds",
)
