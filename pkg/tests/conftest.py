import sys

import numpy as np
import pytest

from orlicz_chord.quadrature import circle_rule, sphere_rule_n3


@pytest.fixture(scope="session")
def rule3():
    return sphere_rule_n3(48, 96)


@pytest.fixture(scope="session")
def coarse3():
    return sphere_rule_n3(16, 32)


@pytest.fixture(scope="session")
def rule2():
    return circle_rule(256)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for name, module in list(sys.modules.items()):
        if name.rsplit(".", 1)[-1] == "test_acceptance":
            lines = getattr(module, "VERDICTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
