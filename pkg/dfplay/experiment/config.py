"""Experiment configuration: JSON with six nested blocks.

Every block is a slotted class holding typed defaults. Unknown keys are
rejected, and ``validate`` runs before any replication starts. ``dict(block)``
is the canonical serialization and is written next to every run.
"""

from copy import deepcopy
from json import dumps, JSONDecodeError, loads
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from ..engine import INITIAL_RULES, TIEBREAKS
from ..exc import ConfigError
from ..network import KINDS, RULES
from ..normal_form import JSON_OPTS


SCENARIOS = ("target", "game", "perturbed")
DELTA_SOURCES = ("generator", "lsq")


class _Block:
    """Base for config blocks. Subclasses list their keys in ``__slots__`` and
        defaults in ``DEFAULTS``.
    """

    __slots__ = ()
    NAME: str = ""
    DEFAULTS: Dict[str, Any] = {}

    def __init__(self, **values):
        for key, default in self.DEFAULTS.items():
            setattr(self, key, deepcopy(values.pop(key, default)))
        if values:
            key = sorted(values)[0]
            raise ConfigError(f"{self.NAME}.{key}", "unknown key")

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> "_Block":
        if data is None:
            return cls()
        if not isinstance(data, dict):
            raise ConfigError(cls.NAME, "must be an object")
        return cls(**data)

    def fail(self, key: str, reason: str):
        raise ConfigError(f"{self.NAME}.{key}", reason)

    def need(self, ok: bool, key: str, reason: str):
        if not ok:
            self.fail(key, reason)

    def validate(self) -> None:
        pass

    def __iter__(self) -> Iterator[Tuple[str, Any]]:
        for key in self.DEFAULTS:
            yield key, getattr(self, key)


def _positive_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 1


def _number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class ScenarioConfig(_Block):
    """Which game is played.

    ``target``: the target-assignment game, with noisy target estimates unless
    ``equal_distance``. ``game``: a game file. ``perturbed``: a potential game
    (identity coordination, or ``game_file``) plus uniform noise of MPD at most
    ``delta``.
    """

    __slots__ = (
        "kind",
        "n_agents",
        "n_targets",
        "n_actions",
        "noise_std",
        "signal_cutoff",
        "equal_distance",
        "distance",
        "agent_std",
        "target_radius",
        "agent_positions",
        "target_positions",
        "game_file",
        "delta",
    )
    NAME = "scenario"
    DEFAULTS = {
        "kind": "target",
        "n_agents": 10,
        "n_targets": 10,
        "n_actions": 2,
        "noise_std": 0.1,
        "signal_cutoff": 10,
        "equal_distance": False,
        "distance": 1.0,
        "agent_std": 0.1,
        "target_radius": 1.0,
        "agent_positions": None,
        "target_positions": None,
        "game_file": None,
        "delta": 0.05,
    }

    def validate(self) -> None:
        self.need(self.kind in SCENARIOS, "kind", f"must be one of {SCENARIOS}")
        self.need(_positive_int(self.n_agents), "n_agents", "must be a positive integer")

        if self.kind == "target":
            self.need(_positive_int(self.n_targets), "n_targets", "must be a positive integer")
            self.need(
                self.n_agents <= self.n_targets,
                "n_targets",
                "must be at least n_agents for one-to-one assignments",
            )
            self.need(_number(self.noise_std) and self.noise_std >= 0, "noise_std", "must be >= 0")
            self.need(_positive_int(self.signal_cutoff), "signal_cutoff", "must be >= 1")
            self.need(_number(self.distance) and self.distance > 0, "distance", "must be > 0")
            self.need(_number(self.agent_std) and self.agent_std >= 0, "agent_std", "must be >= 0")
            self._check_points("agent_positions", self.n_agents)
            self._check_points("target_positions", self.n_targets)
        elif self.kind == "game":
            self.need(bool(self.game_file), "game_file", "is required for game scenarios")
        else:
            self.need(_positive_int(self.n_actions), "n_actions", "must be a positive integer")
            self.need(_number(self.delta) and self.delta >= 0, "delta", "must be >= 0")

    def _check_points(self, key: str, count: int):
        points = getattr(self, key)
        if points is None:
            return
        ok = isinstance(points, list) and len(points) == count
        ok = ok and all(isinstance(p, list) and len(p) == 2 for p in points)
        self.need(ok, key, f"must list {count} points of two coordinates")


class NetworkConfig(_Block):
    """Communication graphs. One set of runs is made per entry of ``kinds``."""

    __slots__ = (
        "kinds",
        "self_weight",
        "rule",
        "p",
        "edges",
    )
    NAME = "network"
    DEFAULTS = {
        "kinds": ["ring"],
        "self_weight": 0.75,
        "rule": "uniform",
        "p": 0.5,
        "edges": None,
    }

    def validate(self) -> None:
        self.need(
            isinstance(self.kinds, list) and len(self.kinds) > 0,
            "kinds",
            "must be a nonempty list",
        )
        for kind in self.kinds:
            self.need(kind in KINDS, "kinds", f"{kind!r} is not one of {sorted(KINDS)}")
            if kind in ("static", "periodic"):
                self.need(self.edges is not None, "edges", f"is required by {kind!r}")
        self.need(len(set(self.kinds)) == len(self.kinds), "kinds", "has duplicates")
        self.need(
            _number(self.self_weight) and 0 < self.self_weight < 1,
            "self_weight",
            "must lie in (0, 1)",
        )
        self.need(self.rule in RULES, "rule", f"must be one of {sorted(RULES)}")
        self.need(_number(self.p) and 0 <= self.p <= 1, "p", "must lie in [0, 1]")


class DfpConfig(_Block):
    __slots__ = (
        "horizon",
        "tiebreak",
        "initial",
        "copy_initial",
        "centralized",
        "keep_beliefs",
        "debug",
    )
    NAME = "dfp"
    DEFAULTS = {
        "horizon": 500,
        "tiebreak": "lowest",
        "initial": "uniform",
        "copy_initial": True,
        "centralized": False,
        "keep_beliefs": False,
        "debug": False,
    }

    def validate(self) -> None:
        self.need(_positive_int(self.horizon), "horizon", "must be a positive integer")
        self.need(self.tiebreak in TIEBREAKS, "tiebreak", f"must be one of {TIEBREAKS}")
        self.need(
            isinstance(self.initial, list) or self.initial in INITIAL_RULES,
            "initial",
            f"must be one of {INITIAL_RULES} or an explicit (N, K) list",
        )


class AnalysisConfig(_Block):
    """Thresholds for the monitors run on every replication.

    ``eps`` defaults to ``2 N delta`` when delta is known. The basin threshold
    defaults to ``N delta + eps1``.
    """

    __slots__ = (
        "eps",
        "eps1",
        "eps2",
        "basin_eps",
        "burn_in",
        "final_window",
        "consensus_t_min",
        "monitors",
        "strict",
        "delta_source",
        "alpha_bar",
        "eps_bar",
        "q_samples",
        "increment_limit",
    )
    NAME = "analysis"
    DEFAULTS = {
        "eps": None,
        "eps1": 0.05,
        "eps2": 0.1,
        "basin_eps": None,
        "burn_in": 100,
        "final_window": 50,
        "consensus_t_min": 10,
        "monitors": True,
        "strict": False,
        "delta_source": "generator",
        "alpha_bar": 0.1,
        "eps_bar": 0.001,
        "q_samples": 2000,
        "increment_limit": 0.05,
    }

    def validate(self) -> None:
        self.need(self.eps is None or (_number(self.eps) and self.eps > 0), "eps", "must be > 0")
        self.need(_number(self.eps1) and 0 < self.eps1, "eps1", "must be > 0")
        self.need(_number(self.eps2) and self.eps1 < self.eps2, "eps2", "must exceed eps1")
        self.need(
            self.basin_eps is None or (_number(self.basin_eps) and self.basin_eps >= 0),
            "basin_eps",
            "must be >= 0",
        )
        self.need(_positive_int(self.burn_in), "burn_in", "must be a positive integer")
        self.need(_positive_int(self.final_window), "final_window", "must be a positive integer")
        self.need(
            _positive_int(self.consensus_t_min),
            "consensus_t_min",
            "must be a positive integer",
        )
        self.need(
            self.delta_source in DELTA_SOURCES,
            "delta_source",
            f"must be one of {DELTA_SOURCES}",
        )
        self.need(_number(self.alpha_bar) and self.alpha_bar > 0, "alpha_bar", "must be > 0")
        self.need(_number(self.eps_bar) and self.eps_bar > 0, "eps_bar", "must be > 0")
        self.need(_positive_int(self.q_samples), "q_samples", "must be a positive integer")


class ReplicationConfig(_Block):
    __slots__ = (
        "n_runs",
        "seed",
        "workers",
    )
    NAME = "replication"
    DEFAULTS = {
        "n_runs": 1,
        "seed": 0,
        "workers": 1,
    }

    def validate(self) -> None:
        self.need(_positive_int(self.n_runs), "n_runs", "must be a positive integer")
        self.need(
            isinstance(self.seed, int) and not isinstance(self.seed, bool) and self.seed >= 0,
            "seed",
            "must be a nonnegative integer",
        )
        self.need(_positive_int(self.workers), "workers", "must be a positive integer")


class OutputConfig(_Block):
    __slots__ = (
        "dir",
        "run_csv",
        "charts",
        "log",
    )
    NAME = "output"
    DEFAULTS = {
        "dir": "out",
        "run_csv": True,
        "charts": False,
        "log": False,
    }

    def validate(self) -> None:
        self.need(isinstance(self.dir, str) and bool(self.dir), "dir", "must be a path")


BLOCKS = {
    "scenario": ScenarioConfig,
    "network": NetworkConfig,
    "dfp": DfpConfig,
    "analysis": AnalysisConfig,
    "replication": ReplicationConfig,
    "output": OutputConfig,
}


class ExperimentConfig:
    __slots__ = (
        "name",
        "scenario",
        "network",
        "dfp",
        "analysis",
        "replication",
        "output",
    )

    def __init__(
        self,
        name: str = "experiment",
        scenario: ScenarioConfig = None,
        network: NetworkConfig = None,
        dfp: DfpConfig = None,
        analysis: AnalysisConfig = None,
        replication: ReplicationConfig = None,
        output: OutputConfig = None,
    ):
        self.name: str = name
        self.scenario: ScenarioConfig = scenario or ScenarioConfig()
        self.network: NetworkConfig = network or NetworkConfig()
        self.dfp: DfpConfig = dfp or DfpConfig()
        self.analysis: AnalysisConfig = analysis or AnalysisConfig()
        self.replication: ReplicationConfig = replication or ReplicationConfig()
        self.output: OutputConfig = output or OutputConfig()

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "must be an object")
        unknown = sorted(set(data) - set(BLOCKS) - {"name"})
        if unknown:
            raise ConfigError(unknown[0], "unknown block")

        return cls(
            str(data.get("name", "experiment")),
            **{key: block.from_dict(data.get(key)) for key, block in BLOCKS.items()},
        )

    @classmethod
    def decode(cls, text: str) -> "ExperimentConfig":
        try:
            data = loads(text)
        except JSONDecodeError as e:
            raise ConfigError("<root>", f"not valid JSON: {e}") from e
        return cls.from_dict(data)

    @property
    def blocks(self) -> List[_Block]:
        return [getattr(self, key) for key in BLOCKS]

    def validate(self) -> "ExperimentConfig":
        for block in self.blocks:
            block.validate()

        initial = self.dfp.initial
        if isinstance(initial, list):
            n, k = self.dims
            ok = len(initial) == n and all(
                isinstance(row, list) and len(row) == k for row in initial
            )
            if not ok:
                raise ConfigError("dfp.initial", f"must be a {n} x {k} list")
        return self

    @property
    def dims(self) -> Tuple[int, int]:
        """``(N, K)`` where the config alone decides them; game files are
            read by the runner.
        """
        s = self.scenario
        if s.kind == "target":
            return s.n_agents, s.n_targets
        return s.n_agents, s.n_actions

    def override(
        self,
        *,
        seed: int = None,
        runs: int = None,
        networks: Sequence[str] = None,
        strict: bool = None,
        out: str = None,
        workers: int = None,
    ) -> "ExperimentConfig":
        if seed is not None:
            self.replication.seed = seed
        if runs is not None:
            self.replication.n_runs = runs
        if networks:
            self.network.kinds = list(networks)
        if strict:
            self.analysis.strict = True
        if out is not None:
            self.output.dir = str(out)
        if workers is not None:
            self.replication.workers = workers
        return self

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "name", self.name
        for key in BLOCKS:
            yield key, dict(getattr(self, key))

    def __str__(self) -> str:
        return dumps(dict(self), **JSON_OPTS)

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(dict(self), indent=2) + "\n", encoding="utf-8")
        return path


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    return ExperimentConfig.decode(Path(path).read_text(encoding="utf-8"))


PRESETS: Dict[str, dict] = {
    "fig1": {
        "name": "fig1",
        "scenario": {
            "kind": "target",
            "n_agents": 10,
            "n_targets": 10,
            "noise_std": 0.1,
            "signal_cutoff": 10,
        },
        "network": {"kinds": ["ring", "star"], "self_weight": 0.75},
        "dfp": {"horizon": 500},
        "analysis": {"monitors": False},
        "replication": {"n_runs": 20, "seed": 0},
        "output": {"dir": "out/fig1", "charts": True},
    },
    "desk": {
        "name": "desk",
        "scenario": {"kind": "perturbed", "n_agents": 2, "n_actions": 3, "delta": 0.05},
        "network": {"kinds": ["complete"], "self_weight": 0.75},
        "dfp": {"horizon": 2000, "initial": "dirichlet"},
        "analysis": {"burn_in": 100, "monitors": True},
        "replication": {"n_runs": 20, "seed": 0},
        "output": {"dir": "out/desk"},
    },
    "centralized": {
        "name": "centralized",
        "scenario": {"kind": "perturbed", "n_agents": 3, "n_actions": 3, "delta": 0.05},
        "network": {"kinds": ["complete"], "rule": "exact"},
        "dfp": {"horizon": 500, "initial": "dirichlet"},
        "analysis": {"burn_in": 50, "monitors": True},
        "replication": {"n_runs": 5, "seed": 0},
        "output": {"dir": "out/centralized"},
    },
}


def preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return ExperimentConfig.from_dict(deepcopy(PRESETS[name]))


__all__ = (
    "AnalysisConfig",
    "DfpConfig",
    "ExperimentConfig",
    "load_config",
    "NetworkConfig",
    "OutputConfig",
    "preset",
    "PRESETS",
    "ReplicationConfig",
    "ScenarioConfig",
)
