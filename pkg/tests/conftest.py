import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cshtemporal.spectral import Grid, SpectralField

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_field(grid: Grid, rng: np.random.Generator, kmax=None, real=False) -> SpectralField:
    c = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    c = c * grid.bracket ** -2.0
    if kmax is not None:
        c = np.where(grid.ksq <= kmax**2, c, 0)
    f = SpectralField(grid, c)
    return f.real() if real else f


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)

