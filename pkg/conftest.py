import random
from fractions import Fraction

import pytest

from src.config import LabConfig


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def lab_config():
    return LabConfig()


@pytest.fixture
def random_rational(rng):
    def draw(max_den: int = 10**4) -> Fraction:
        q = rng.randint(2, max_den)
        return Fraction(rng.randint(1, q - 1), q)

    return draw
