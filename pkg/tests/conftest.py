import sys

import pytest

from lpki.ec import builtin_params
from lpki.rand import SeededRandomSource
from lpki.world import World


@pytest.fixture(scope="session")
def toy():
    return builtin_params("toy17")


@pytest.fixture(scope="session")
def p256():
    return builtin_params("P-256")


@pytest.fixture
def rng():
    return SeededRandomSource(1234)


@pytest.fixture
def world():
    return World.create()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
