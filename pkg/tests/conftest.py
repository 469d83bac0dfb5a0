import itertools

import numpy as np
import pytest

from src.cartan import GENERATORS
from src.linalg import commutator

SEED = 20240517


def pytest_sessionstart(session: pytest.Session) -> None:
    for a, b in itertools.combinations(GENERATORS, 2):
        assert not np.any(commutator(a, b)), "Cartan generators must commute exactly"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(SEED)
