import pathlib

import pytest
from hypothesis import HealthCheck, settings

from z2nsuper import VariableTable, load

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


@pytest.fixture
def load_fixture():
    return lambda name: load(fixture_path(name))


@pytest.fixture
def t2():
    """x; xi:(0,1), eta:(1,0), theta:(1,1) under the scalar-product rule."""
    return VariableTable.build(2, ["x"], [("xi", "(0,1)"), ("eta", "(1,0)"), ("theta", "(1,1)")])


@pytest.fixture
def t3():
    """One coordinate per nonzero Z_2^3 degree, reversed lexicographic order."""
    names = ["111", "110", "101", "100", "011", "010", "001"]
    return VariableTable.build(3, ["x"], [("xi" + b, "(" + ",".join(b) + ")") for b in names])
