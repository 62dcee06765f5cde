import numpy as np
import pytest
from hypothesis import strategies as st

from ghlab.metric import from_points, random_graph_space, random_space, validate


def line(*xs):
    """Points on the real line with the usual distance."""
    return validate(np.abs(np.subtract.outer(xs, xs)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pool(rng, count, lo, hi):
    """Alternating Euclidean and graph-metric random spaces."""
    out = []
    for k in range(count):
        gen = random_space if k % 2 else random_graph_space
        out.append(gen(int(rng.integers(lo, hi + 1)), rng))
    return out


coords = st.floats(-10, 10, allow_nan=False, allow_infinity=False).map(lambda v: round(v, 3))


@st.composite
def spaces(draw, min_size=1, max_size=5):
    """Small Euclidean spaces with distinct points."""
    n = draw(st.integers(min_size, max_size))
    pts = draw(st.lists(st.tuples(coords, coords), min_size=n, max_size=n,
                        unique_by=lambda p: p))
    return from_points(pts)


@st.composite
def graph_spaces(draw, min_size=1, max_size=4):
    """Integer shortest-path metrics, which make ties and exact arithmetic common."""
    n = draw(st.integers(min_size, max_size))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_graph_space(n, np.random.default_rng(seed), max_weight=4)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
