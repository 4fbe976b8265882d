import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cartan_kit import bundle as B
from cartan_kit import connection as C
from cartan_kit import forms as F
from cartan_kit import manifold as M

settings.register_profile("ci", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture(scope="session")
def sphere():
    return M.sphere2()


@pytest.fixture(scope="session")
def torus():
    return M.torus2()


@pytest.fixture(scope="session")
def round_metric(sphere):
    return M.round_sphere_metric(sphere)


@pytest.fixture(scope="session")
def torus_metric(torus):
    return M.random_torus_metric(torus, seed=3)


@pytest.fixture(scope="session")
def torus_frames(torus):
    return B.frame_bundle(torus)


@pytest.fixture(scope="session")
def sphere_frames(sphere):
    return B.frame_bundle(sphere)


@pytest.fixture(scope="session")
def sphere_so(sphere, round_metric):
    return B.orthonormal_frame_bundle(sphere, round_metric)


@pytest.fixture(scope="session")
def homogeneous(sphere):
    return B.homogeneous_sphere_bundle(sphere)


@pytest.fixture(scope="session")
def torus_samples(torus_frames):
    return F.form_samples(torus_frames, 60, seed=1)


@pytest.fixture(scope="session")
def sphere_so_samples(sphere_so):
    return F.form_samples(sphere_so, 60, seed=1)


@pytest.fixture(scope="session")
def sphere_lc(sphere_so, round_metric):
    return C.build_connection(C.levi_civita_local_data(sphere_so, round_metric))


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
