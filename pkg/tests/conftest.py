import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("ci", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)
nonzero_cplx = cplx.filter(lambda z: abs(z) > 1e-3)


def triples(min_norm=1e-3):
    return st.tuples(cplx, cplx, cplx).filter(lambda v: np.linalg.norm(v) > min_norm)


def non_isotropic_pairs():
    return st.tuples(cplx, cplx).filter(
        lambda v: abs(v[0] ** 2 + v[1] ** 2) > 1e-3 * (abs(v[0]) ** 2 + abs(v[1]) ** 2) + 1e-6)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
