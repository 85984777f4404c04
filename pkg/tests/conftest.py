from functools import lru_cache

import pytest

from radial_itp import liouville, profiles

ACCEPTANCE_LINES = []


@lru_cache(maxsize=None)
def frame_of(kind, *args):
    makers = {
        "bump": profiles.make_bump_profile,
        "window": profiles.make_window_profile,
        "const": profiles.make_constant_test_index,
    }
    return liouville.build_frame(makers[kind](*args))


@pytest.fixture(scope="session")
def frames():
    return frame_of


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
