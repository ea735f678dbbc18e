import random
from pathlib import Path

import pytest

from qclp.program import parse_program

DATA = Path(__file__).resolve().parents[1] / "src" / "qclp" / "data"

EX1 = (DATA / "ex1.qclp").read_text()

PATH = """\
edge(X, Y) <- 0.8 : X = a & Y = b.
edge(X, Y) <- 0.6 : X = b & Y = c.
path(X, Y) <- edge(X, Y).
path(X, Z) <- edge(X, Y) & path(Y, Z).
"""


@pytest.fixture
def ex1():
    return parse_program(EX1)


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def rng():
    return random.Random(1234)
