import numpy as np
import pytest
from hypothesis import strategies as st

from intraqkd.qstate import StateVector

finite = st.floats(-1, 1, allow_nan=False, allow_infinity=False)
angles = st.floats(0, 2 * np.pi, allow_nan=False)


@st.composite
def states(draw, dim=4, dims=(2, 2)):
    re = draw(st.lists(finite, min_size=dim, max_size=dim))
    im = draw(st.lists(finite, min_size=dim, max_size=dim))
    v = np.array(re) + 1j * np.array(im)
    if np.linalg.norm(v) < 1e-3:
        v = np.eye(dim)[0].astype(complex)
    return StateVector(v / np.linalg.norm(v), dims)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
