import functools

import pytest

from gaplab.experiments import solve_instance
from gaplab.geometry import build_grid, geometry_from_eps


@functools.lru_cache(maxsize=None)
def solved(n, k, eps, n_xi=33, n_eta=129, tolerance=1e-10):
    """Solved field and report, cached across the session (fields are immutable)."""
    return solve_instance(n, k, eps, n_xi, n_eta, tolerance=tolerance)


@pytest.fixture(scope="session")
def solve_cached():
    return solved


@pytest.fixture(scope="session")
def small_grid():
    return build_grid(geometry_from_eps(1e-2), 17, 65)


ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = {}


def _line(number, title, passed, detail):
    return f"{'PASS' if passed else 'FAIL'} criterion {number:>2}: {title} ({detail})"


@pytest.fixture
def verdict(request):
    """Record the PASS/FAIL line of the test's ``criterion`` marker and fail when it does not hold."""
    number, title = request.node.get_closest_marker("criterion").args

    def record(passed, detail):
        line = _line(number, title, passed, detail)
        request.config.stash[ACCEPTANCE_KEY][number] = line
        print(line)
        assert passed, line

    return record


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("criterion")
    if marker and report.when == "call" and report.failed:
        lines = item.config.stash[ACCEPTANCE_KEY]
        number, title = marker.args
        if number not in lines:
            lines[number] = _line(number, title, False, f"error: {call.excinfo.typename}")
    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
