import numpy as np
import pytest

from mramquant.channel import ChannelParams

SWEEP = (0.08, 0.10, 0.12, 0.14)


def nominal_params(ratio=0.12, P0=0.0, Pr=0.0):
    return ChannelParams.from_sigma_ratio(ratio, P0=P0, Pr=Pr)


def symmetric_params(sigma=0.12, P=2e-4):
    return ChannelParams(P0=P, P1=P, Pr=0.0, mu0=1.0, mu1=2.0, sigma0=sigma, sigma1=sigma)


def random_params(rng):
    mu0 = rng.uniform(0.5, 1.5)
    mu1 = mu0 + rng.uniform(0.5, 1.5)
    ratio = rng.uniform(0.05, 0.2)
    return ChannelParams(
        P0=rng.uniform(0, 0.05), P1=rng.uniform(0, 0.05), Pr=rng.uniform(0, 0.02),
        mu0=mu0, mu1=mu1, sigma0=ratio * mu0, sigma1=rng.uniform(0.05, 0.2) * mu1,
    )


@pytest.fixture
def nominal():
    return nominal_params()


@pytest.fixture
def symmetric():
    return symmetric_params()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
