import pytest

from friedrichs import certificate, make_preset, solve_model


@pytest.fixture(scope="session")
def hydrogen():
    return make_preset("hydrogen-4level")


@pytest.fixture(scope="session")
def three_level():
    return make_preset("three-level-fig")


@pytest.fixture(scope="session")
def hydrogen_cert(hydrogen):
    # ~5 s; shared by the threshold regression tests and the acceptance gate
    return certificate(hydrogen)


@pytest.fixture(scope="session")
def three_level_reports(three_level):
    return {lam: solve_model(three_level.with_coupling(lam))
            for lam in (0.1, 0.7, 10.0)}
