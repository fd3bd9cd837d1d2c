import numpy as np
import pytest

from lattice_connes import LatticeSpec, random_link

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_case(topology, sites, seed):
    spec = LatticeSpec(topology, sites)
    return spec, random_link(spec, np.random.default_rng(seed))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
