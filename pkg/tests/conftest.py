from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from krwlab.boolcore import AND, XOR
from krwlab.halfduplex import reduction_transform
from krwlab.relations import mux_compose
from krwlab.suites import reduction_protocols

settings.register_profile("krwlab", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("krwlab")


@pytest.fixture(scope="session")
def and_reduction():
    f = AND(2)
    rel = mux_compose(f, 2, strong=True)
    return rel, reduction_transform(reduction_protocols(f, 2), f, 2, relation=rel)


@pytest.fixture(scope="session")
def xor_reduction():
    f = XOR(2)
    rel = mux_compose(f, 2, strong=True)
    return rel, reduction_transform(reduction_protocols(f, 2), f, 2, relation=rel)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
