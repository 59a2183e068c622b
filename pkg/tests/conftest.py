import numpy as np
import pytest

from ldexpand import (
    EquivalentFamily,
    RateData,
    gaussian_triple,
    heston_cgf,
    toy_params,
)


@pytest.fixture(scope="session")
def gauss_cgf():
    return gaussian_triple()


@pytest.fixture(scope="session")
def gauss_rd(gauss_cgf):
    return RateData(gauss_cgf)


@pytest.fixture(scope="session")
def gauss_family(gauss_rd):
    return EquivalentFamily(gauss_rd)


@pytest.fixture(scope="session")
def heston_toy():
    return toy_params()


@pytest.fixture(scope="session")
def heston_toy_cgf(heston_toy):
    return heston_cgf(heston_toy)


@pytest.fixture(scope="session")
def heston_toy_rd(heston_toy_cgf):
    return RateData(heston_toy_cgf)


@pytest.fixture(scope="session")
def heston_toy_family(heston_toy_rd):
    return EquivalentFamily(heston_toy_rd)


@pytest.fixture(scope="session")
def dyadic_eps():
    return np.array([2.0**-j for j in range(4, 11)])
