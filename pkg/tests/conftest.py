import pytest
from hypothesis import settings

from tangentlift.specfile import CATALOG, catalog_spec

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def catalog():
    return {name: catalog_spec(name) for name in CATALOG}


@pytest.fixture(scope="session")
def flat(catalog):
    return catalog["flat_cartesian"]


@pytest.fixture(scope="session")
def polar(catalog):
    return catalog["flat_polar"]


@pytest.fixture(scope="session")
def sphere(catalog):
    return catalog["sphere"]


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import SUMMARY

    if SUMMARY:
        terminalreporter.section("acceptance criteria")
        for line in sorted(SUMMARY, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
