import math

import pytest

from dubins_synthesis import build, save
from dubins_synthesis.families import FamilyTree

ETA = 2.0


@pytest.fixture(scope="session")
def tree():
    return FamilyTree(ETA)


@pytest.fixture(scope="session")
def syn():
    """The eta = 2 synthesis, built once per test session."""
    return build(ETA)


@pytest.fixture(scope="session")
def syn_file(syn, tmp_path_factory):
    path = tmp_path_factory.mktemp("synthesis") / "s.json"
    save(syn, path)
    return path


def close(a, b, tol):
    return abs(a - b) <= tol


def dist(p, q):
    return math.hypot(p[0] - q[0], p[1] - q[1])


class _Criterion:
    def __init__(self, config, nodeid):
        self.config = config
        self.nodeid = nodeid
        self.recorded = False

    def record(self, number: int, title: str, passed: bool, detail: str) -> None:
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        self.config._acceptance.append((number, line))
        self.recorded = True
        print(line)


@pytest.fixture
def criterion(request):
    c = _Criterion(request.config, request.node.nodeid)
    yield c
    if not c.recorded:
        request.config._acceptance.append((99, f"criterion ?? FAIL  {request.node.name}: raised before reporting"))


def pytest_configure(config):
    config._acceptance = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not config._acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(config._acceptance):
        terminalreporter.write_line(line)
