from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from ecplab.geometry import DomainSpec
from ecplab.mesh import generate, refine

settings.register_profile("ecplab", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ecplab")


@pytest.fixture(scope="session")
def t0_mesh():
    return generate(DomainSpec.triangle(), 0.1)


@pytest.fixture(scope="session")
def t0_fine():
    return refine(generate(DomainSpec.triangle(), 0.05))


@pytest.fixture(scope="session")
def omega01_fine():
    return refine(generate(DomainSpec.omega(0.1), 0.05))
