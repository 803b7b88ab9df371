import numpy as np
import pytest

from eiv.numerics import DiscreteDistribution, RealGrid, StepFunction
from eiv.simulate import (
    default_dgp,
    default_error_distribution,
    default_step_g,
    oracle_moments,
)


@pytest.fixture(scope="session")
def freq_grid() -> RealGrid:
    return RealGrid.symmetric(10.0, 2001)


@pytest.fixture(scope="session")
def target_grid() -> RealGrid:
    return RealGrid.symmetric(3.0, 601)


@pytest.fixture(scope="session")
def step_g() -> StepFunction:
    return default_step_g()


@pytest.fixture(scope="session")
def three_atom() -> DiscreteDistribution:
    return default_error_distribution()


@pytest.fixture(scope="session")
def oracle_carriers(step_g, three_atom):
    return oracle_moments(step_g, three_atom)


@pytest.fixture(scope="session")
def default_sample_50k():
    from eiv.simulate import draw

    return draw(default_dgp(0), 50000)
