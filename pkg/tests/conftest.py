import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from minutiae_stego.template import MinutiaeTemplate

GOLDEN = Path(__file__).parent / "golden"

TABLE_I = [(43, 152, 236), (43, 185, 236), (46, 141, 225), (46, 125, 214), (47, 114, 56), (48, 229, 225)]


def random_template(rng: random.Random, n: int, coord_max: int = 1023) -> MinutiaeTemplate:
    rows = [(rng.randint(0, coord_max), rng.randint(0, coord_max), rng.randint(0, 359)) for _ in range(n)]
    rows.sort(key=lambda r: r[0])
    return MinutiaeTemplate.from_tuples(rows)


@st.composite
def templates(draw, min_size=0, max_size=50, coord_max=0xFFFF):
    rows = draw(st.lists(
        st.tuples(st.integers(0, coord_max), st.integers(0, coord_max), st.integers(0, 359)),
        min_size=min_size, max_size=max_size,
    ))
    rows.sort(key=lambda r: r[0])
    return MinutiaeTemplate.from_tuples(rows)


@pytest.fixture
def table_i():
    return MinutiaeTemplate.from_tuples(TABLE_I)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
