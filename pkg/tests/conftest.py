import numpy as np
import pytest

from semqoe.harness import default_bundle
from semqoe.netmodel import ScenarioConfig, generate_scenario


@pytest.fixture(scope="session")
def bundle():
    return default_bundle()


@pytest.fixture(scope="session")
def default_scenario():
    return generate_scenario(ScenarioConfig(), seed=0)


def tiny_config(seed: int) -> ScenarioConfig:
    """Small single-cell layouts cycling with the seed: <= 3 users, <= 3 channels."""
    variants = (
        dict(channels=2, n_sem_single=2, n_sem_pair=0),
        dict(channels=3, n_sem_single=1, n_sem_pair=1),
        dict(channels=2, n_sem_single=0, n_sem_pair=1),
        dict(channels=3, n_sem_single=3, n_sem_pair=0),
    )
    return ScenarioConfig(cells=1, power_levels_dbm=(0.0, 10.0),
                          **variants[seed % len(variants)])


def rng_of(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
