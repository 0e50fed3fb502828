import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from proxlp import numerics as nx
from proxlp.subspace import Subspace

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def int_matrices(draw, max_m=3, max_n=6, lo=-3, hi=3, min_n=2):
    """Integer matrices with at least one nonzero entry and m < n."""
    n = draw(st.integers(min_n, max_n))
    m = draw(st.integers(1, min(max_m, n - 1)))
    A = [[draw(st.integers(lo, hi)) for _ in range(n)] for _ in range(m)]
    if all(x == 0 for r in A for x in r):
        A[0][0] = 1
    return A


def rationals(lo=-5, hi=5, den=4):
    return st.builds(lambda a, b: nx.q(a) / b, st.integers(lo * den, hi * den), st.integers(1, den))


@pytest.fixture
def rng():
    return random.Random(1234)


def kernel(A):
    return Subspace.kernel(A)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import SUMMARY
    except ImportError:
        return
    if SUMMARY:
        terminalreporter.section("acceptance criteria")
        for line in SUMMARY:
            terminalreporter.write_line(line)
