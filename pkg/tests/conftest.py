import numpy as np
import pytest

from fmcwsparse.geometry import RadarConfig, build_grids, reference_pairs, REFERENCE_CORNER


@pytest.fixture(scope="session")
def cfg():
    return RadarConfig.reference()


@pytest.fixture(scope="session")
def pairs():
    return reference_pairs()


@pytest.fixture(scope="session")
def grids4(cfg):
    return build_grids(cfg, REFERENCE_CORNER, 4, 4)


@pytest.fixture(scope="session")
def grids8(cfg):
    return build_grids(cfg, REFERENCE_CORNER, 8, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
