import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def point_sets(min_size=1, max_size=12, dims=(2, 3), scale=5.0):
    """Hypothesis strategy: (n, d) float arrays of moderate magnitude."""
    coord = st.floats(-scale, scale, allow_nan=False, allow_infinity=False, width=64)

    @st.composite
    def build(draw):
        d = draw(st.sampled_from(dims))
        n = draw(st.integers(min_size, max_size))
        rows = draw(st.lists(st.lists(coord, min_size=d, max_size=d), min_size=n, max_size=n))
        return np.array(rows, dtype=np.float64)

    return build()


def random_rigid(rng, d):
    """Random orthogonal matrix (rotation or reflection) and translation."""
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    q = q * np.sign(np.diag(r))
    return q, rng.normal(size=d) * 3.0


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[num])
