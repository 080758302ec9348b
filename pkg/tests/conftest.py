import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_RESULTS: dict[int, tuple[str, bool, str]] = {}
_START = time.perf_counter()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def detail():
    """Measured values reported next to the criterion's pass/fail line."""
    return {}


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    info = item.funcargs.get("detail") or {}
    text = ", ".join(f"{k}={_fmt(v)}" for k, v in info.items())
    _RESULTS[number] = (title, report.passed, text)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, passed, text = _RESULTS[number]
        tr.write_line(f"AC-{number:02d} {'PASS' if passed else 'FAIL'}  {title}" + (f"  [{text}]" if text else ""))
    n_pass = sum(p for _, p, _ in _RESULTS.values())
    tr.write_line(f"{n_pass}/{len(_RESULTS)} criteria passed; session wall time {time.perf_counter() - _START:.1f} s")
