import numpy as np
import pytest

from pairgen.dispersion import OpticalMedium, load_media

C = 299792458.0


def omega(lam):
    return 2 * np.pi * C / lam


@pytest.fixture(scope="session")
def media():
    return load_media()


@pytest.fixture
def flat():
    """Dispersionless nonlinear medium, n = 2.2."""
    return OpticalMedium("flat", "constant", (2.2,), d_eff=5e-12)


@pytest.fixture
def flat_linear():
    return OpticalMedium("flat_lin", "constant", (2.2,))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
