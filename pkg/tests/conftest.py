import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

from afideal.cf import ContinuedFraction

sys.path.insert(0, str(Path(__file__).parent))


@st.composite
def periodic_thetas(draw, max_term=10):
    head = draw(st.lists(st.integers(1, max_term), min_size=1, max_size=5))
    period = draw(st.lists(st.integers(1, max_term), min_size=1, max_size=3))
    return ContinuedFraction((0, *head), tuple(period))


@st.composite
def prefix_thetas(draw, min_size=40, max_term=10):
    terms = draw(st.lists(st.integers(1, max_term), min_size=min_size, max_size=min_size + 10))
    return ContinuedFraction((0, *terms), truncated=True)


@pytest.fixture
def golden():
    return ContinuedFraction((0,), (1,))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
