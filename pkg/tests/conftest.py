import numpy as np
import pytest

from cggibbs.glm_core import Dataset, GlmModel, Horseshoe, IsotropicGaussian, Likelihood

#: filled by test_acceptance, printed at the end of the session
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


def random_dataset(rng, n, d, density=1.0):
    X = rng.normal(size=(n, d))
    if density < 1.0:
        X *= rng.random((n, d)) < density
    y = (rng.random(n) < 0.5).astype(float)
    return Dataset(X, y)


@pytest.fixture
def gaussian_model():
    return GlmModel(IsotropicGaussian(10.0), Likelihood.LOGISTIC_BERNOULLI)


@pytest.fixture
def horseshoe_model():
    return GlmModel(Horseshoe(), Likelihood.LOGISTIC_BERNOULLI)


@pytest.fixture
def small_dataset():
    return random_dataset(np.random.default_rng(11), 40, 6)
