import numpy as np
import pytest

from nonlocal_lwr.entropy import exponential_entropy, quadratic_entropy, quartic_entropy
from nonlocal_lwr.flux import greenshields, tabulated_velocity


@pytest.fixture(scope="session")
def vel():
    return greenshields()


@pytest.fixture(scope="session")
def vel_tab_smoothish():
    # strictly decreasing piecewise-linear law
    xs = np.linspace(0.0, 1.0, 11)
    return tabulated_velocity(xs, 1.0 - 0.7 * xs - 0.3 * xs**2)


@pytest.fixture(scope="session")
def vel_tab_kinky():
    return tabulated_velocity([0.0, 0.3, 0.7, 1.0], [1.0, 0.75, 0.3, 0.05])


@pytest.fixture(scope="session")
def quad_pair(vel):
    return quadratic_entropy(vel)


@pytest.fixture(scope="session")
def convex_pairs(vel):
    return [quadratic_entropy(vel), quartic_entropy(vel), exponential_entropy(vel)]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
