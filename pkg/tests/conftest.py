import math
import time

import pytest
from hypothesis import settings

from outpostlab.potential import (
    build_elliptic_ginibre_model,
    build_ginibre_model,
    build_quadrature_domain_model,
    build_radial_model,
)

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

SESSION_T0 = time.monotonic()


def session_elapsed() -> float:
    return time.monotonic() - SESSION_T0


@pytest.fixture(scope="session")
def ginibre_model():
    return build_ginibre_model()


@pytest.fixture(scope="session")
def radial_model():
    # unit-capacity outpost at r2 = 1.25 with flat curve laplacian
    return build_radial_model(1.25, 1.0)


@pytest.fixture(scope="session")
def radial_c1():
    # t0 = e^2 puts the recorded constant at c = 1, separating sign conventions
    return build_radial_model(1.5, math.e**2)


@pytest.fixture(scope="session")
def smooth_model():
    from outpostlab.potential import GapFill

    return build_radial_model(1.25, 1.0, GapFill.SMOOTH)


@pytest.fixture(scope="session")
def elliptic_model():
    return build_elliptic_ginibre_model(-0.3, 0.8, 1.3, 1.0)


@pytest.fixture(scope="session")
def qd_model():
    return build_quadrature_domain_model(-0.5, 0.735, 1.0, 1.0)
