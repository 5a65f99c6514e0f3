import pytest

from ringdeco.model import derive_dimensionless, load_scenario


@pytest.fixture(scope="session")
def rb_cfg():
    return load_scenario("rb-atom")


@pytest.fixture(scope="session")
def rb(rb_cfg):
    return derive_dimensionless(rb_cfg)


@pytest.fixture(scope="session")
def nano():
    return derive_dimensionless(load_scenario("nanoparticle"))


@pytest.fixture(scope="session")
def rb_thermal():
    return derive_dimensionless(load_scenario("rb-atom-thermal"))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_criterion():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
