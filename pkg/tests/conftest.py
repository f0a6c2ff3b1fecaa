from importlib.resources import files

import numpy as np
import pytest

from pfgame import Operator, Var, load_operator, load_tensor

DATA = files("pfgame") / "data"


def one_based(sets):
    return [set(i + 1 for i in s) for s in sets]


def zero_based(s):
    return {i - 1 for i in s}


def arcs_1b(h):
    """Hypergraph arcs as ``(tail tuple, head)`` with 1-based labels."""
    return {(tuple(sorted(j + 1 for j in t)), hd + 1) for t, hd in h.arc_set()}


@pytest.fixture(scope="session")
def running():
    return load_operator(DATA / "running_example.op")


@pytest.fixture(scope="session")
def blackmailer():
    return load_operator(DATA / "blackmailer.op")


@pytest.fixture(scope="session")
def tensor53():
    return load_tensor(DATA / "example53.tns")


@pytest.fixture(scope="session")
def e_expr():
    return load_operator(DATA / "e_expr.op")


@pytest.fixture
def identity2():
    return Operator(2, (Var(0), Var(1)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# one line per acceptance criterion, shown at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
