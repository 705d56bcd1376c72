"""
Shared fixtures: reference parameter sets at test-friendly sizes
"""
import os

# Must precede any src import: Config reads the environment at import time
os.environ["LOG_TO_FILE"] = "false"

import pytest  # noqa: E402

from src.bounds import ScheduleParams  # noqa: E402
from src.dynamics import SystemKind, SystemSpec  # noqa: E402
from src.influence import InfluenceFunction  # noqa: E402
from src.noise import DiffNoiseModel  # noqa: E402

REFERENCE_D = 20.0


@pytest.fixture
def ref_G():
    """delta = 0.5: G(x) = 1/(1+x^0.5)"""
    return InfluenceFunction.rational(alpha=0.5)


@pytest.fixture
def ref_G_tilde():
    """delta_tilde = 0.55: G~(x) = 1/(1+x^(2/3-0.55))"""
    return InfluenceFunction.rational(alpha=2.0 / 3.0 - 0.55)


@pytest.fixture
def uniform_noise():
    return DiffNoiseModel.uniform(REFERENCE_D)


@pytest.fixture
def lattice_noise():
    """{-2, 0, 2} with masses {1/4, 1/2, 1/4}"""
    return DiffNoiseModel.discrete({-2.0: 0.25, 0.0: 0.5, 2.0: 0.25})


@pytest.fixture
def two_agent_spec(ref_G, uniform_noise):
    return SystemSpec(G=ref_G, noise=uniform_noise)


@pytest.fixture
def bistar_spec(ref_G, ref_G_tilde, uniform_noise):
    return SystemSpec(kind=SystemKind.BISTAR, G=ref_G, G_tilde=ref_G_tilde, noise=uniform_noise)


@pytest.fixture
def bistar_schedule():
    return ScheduleParams(beta=0.125, beta_tilde=0.055, xi=0.5, c1=1.0, c2=0.8)
