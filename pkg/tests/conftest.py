import os
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from evlab.config import Configuration, from_blocks  # noqa: E402

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

STAIRS = from_blocks((8, 3, 4, 1, 2, 1, 2, 1, 8, 4))


@st.composite
def configurations(draw, max_blocks=6, max_len=6, allow_ground=True):
    N = draw(st.integers(0 if allow_ground else 1, max_blocks))
    blocks = draw(st.lists(st.integers(1, max_len), min_size=2 * N, max_size=2 * N))
    return Configuration(tuple(blocks))


@pytest.fixture
def stairs_config():
    return STAIRS


# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
