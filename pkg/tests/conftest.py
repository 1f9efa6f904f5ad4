import numpy as np
import pytest

from dfplay.experiment.config import ExperimentConfig
from dfplay.games import coordination_file, identity_coordination, matching_pennies
from dfplay.util import set_verbosity


SEED = 20240517


@pytest.fixture(autouse=True)
def quiet():
    set_verbosity(0)
    yield
    set_verbosity(2)


@pytest.fixture
def rng():
    """Same numbers on every run, for test consistency."""
    return np.random.default_rng(SEED)


@pytest.fixture
def coordination():
    return identity_coordination(2, 2)


@pytest.fixture
def pennies():
    return matching_pennies()


@pytest.fixture
def coordination_game_file():
    return coordination_file(2)


@pytest.fixture
def target_config(tmp_path):
    """Three agents and three noisy targets, small enough for a quick run."""

    def make(**overrides) -> ExperimentConfig:
        data = {
            "name": "small",
            "scenario": {"kind": "target", "n_agents": 3, "n_targets": 3},
            "network": {"kinds": ["ring", "star"]},
            "dfp": {"horizon": 30},
            "analysis": {"burn_in": 5},
            "replication": {"n_runs": 2, "seed": 7},
            "output": {"dir": str(tmp_path / "out")},
        }
        for block, values in overrides.items():
            data.setdefault(block, {}).update(values)
        return ExperimentConfig.from_dict(data)

    return make
