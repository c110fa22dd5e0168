import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from mpa_workbench import fixtures  # noqa: E402
from mpa_workbench.presentations import combined_system, cycle_system, partial_system  # noqa: E402
from mpa_workbench.quiver import build_doubled  # noqa: E402


def builtin_presentations():
    """Every presentation flavor on the standard quivers, keyed by a short name."""
    figure = build_doubled(fixtures.figure_two_quiver())
    white = fixtures.FIGURE_TWO_WHITE
    return {
        "cycle-1": lambda: cycle_system(1),
        "cycle-3": lambda: cycle_system(3),
        "cycle-barred-2": lambda: cycle_system(2, barred=True),
        "partial-figure-two": lambda: partial_system(figure, white),
        "partial-barred-figure-two": lambda: partial_system(figure, white, barred=True),
        "combined-a2-pendant": lambda: combined_system(fixtures.a2_plus_pendant()),
        "combined-jordan-pendant": lambda: combined_system(fixtures.jordan_plus_pendant()),
        "combined-figure-two": lambda: combined_system(fixtures.figure_two_quiver()),
    }


_CACHE = {}


def get_presentation(name):
    if name not in _CACHE:
        _CACHE[name] = builtin_presentations()[name]()
    return _CACHE[name]


@pytest.fixture(params=sorted(builtin_presentations()))
def presentation(request):
    return get_presentation(request.param)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda text: int(text.split()[1])):
            terminalreporter.write_line(line)
