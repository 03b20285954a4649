import numpy as np
import pytest

from fracflow import FlowConfig, FluidParams, bessel_j1_zeros


@pytest.fixture(scope="session")
def basis50():
    return bessel_j1_zeros(1.0, 50)


@pytest.fixture(scope="session")
def basis200():
    return bessel_j1_zeros(1.0, 200)


@pytest.fixture
def fc():
    return FlowConfig()


@pytest.fixture
def frac():
    # the standard fractional desk case
    return FluidParams(nu=1.0, alpha=0.5, rho=1.0, beta=0.5)


@pytest.fixture
def grid4():
    return np.array([0.25, 0.5, 0.75, 1.0]), np.array([0.1, 0.5, 1.0, 2.0])
